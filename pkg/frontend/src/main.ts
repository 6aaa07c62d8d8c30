/** Browser bootstrap: wire the controller to the page and the service. */

import { StudyApi, HttpFn } from "./api";
import { SessionController } from "./controller";
import { ExperimentView, collectDevice } from "./dom";

function preloadVideo(url: string): Promise<void> {
    return new Promise((resolve, reject) => {
        const video = document.createElement("video");
        video.preload = "auto";
        video.oncanplaythrough = () => resolve();
        video.onerror = () => reject(new Error(`cannot load ${url}`));
        video.src = url;
    });
}

async function enterFullscreen(): Promise<void> {
    if (!document.fullscreenElement) {
        await document.documentElement.requestFullscreen();
    }
}

export function boot(): void {
    const params = new URLSearchParams(location.search);
    const base = params.get("service") ?? "";
    const api = new StudyApi(base, fetch.bind(window) as HttpFn);
    const controller = new SessionController(api, { mediaLoader: preloadVideo });
    const container = document.getElementById("experiment");
    if (!container) {
        throw new Error("missing #experiment container");
    }
    new ExperimentView(container, controller);

    const consentButton = document.getElementById("consent-accept");
    consentButton?.addEventListener("click", () => {
        void (async () => {
            await enterFullscreen();
            await controller.start(collectDevice());
        })();
    });
    const startButton = document.getElementById("start-test");
    startButton?.addEventListener("click", () => void controller.beginTest());
}

boot();
