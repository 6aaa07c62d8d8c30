/** DOM renderer: binds the controller's view state to the page. */

import { SessionController, DeviceInfo } from "./controller";
import { SCALE_LABELS, ViewState } from "./types";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text) {
        node.textContent = text;
    }
    return node;
}

export function collectDevice(): DeviceInfo {
    const video = document.createElement("video");
    return {
        width: window.innerWidth,
        height: window.innerHeight,
        fullscreen: document.fullscreenElement !== null,
        canDecodeMedia: video.canPlayType("video/mp4") !== "",
    };
}

export class ExperimentView {
    private readonly root: HTMLElement;
    private readonly refVideo: HTMLVideoElement;
    private readonly distVideo: HTMLVideoElement;
    private readonly scale: HTMLElement;
    private readonly status: HTMLElement;
    private readonly overlay: HTMLElement;
    private readonly buttons: HTMLButtonElement[] = [];

    constructor(container: HTMLElement, private readonly controller: SessionController) {
        this.root = container;
        this.refVideo = el("video", "stimulus stimulus-ref");
        this.distVideo = el("video", "stimulus stimulus-dist");
        for (const video of [this.refVideo, this.distVideo]) {
            video.muted = true;
            video.autoplay = true;
            // no user control: the pair plays once, end to end
            video.controls = false;
        }
        this.scale = el("div", "scale");
        for (const entry of SCALE_LABELS) {
            const button = el("button", "scale-button", `${entry.score} - ${entry.label}`);
            button.dataset["score"] = String(entry.score);
            button.addEventListener("click", () => void this.controller.rate(entry.score));
            this.scale.appendChild(button);
            this.buttons.push(button);
        }
        this.status = el("div", "status");
        this.overlay = el("div", "overlay");

        const stage = el("div", "stage");
        stage.appendChild(this.refVideo);
        stage.appendChild(this.distVideo);
        this.root.appendChild(this.status);
        this.root.appendChild(stage);
        this.root.appendChild(this.scale);
        this.root.appendChild(this.overlay);

        document.addEventListener("fullscreenchange", () => {
            this.controller.fullscreenChanged(document.fullscreenElement !== null);
        });
        // back navigation is disabled for the whole experiment
        history.pushState(null, "", location.href);
        window.addEventListener("popstate", () => {
            history.pushState(null, "", location.href);
        });

        controller.subscribe((state) => this.render(state));
        this.render(controller.getState());
    }

    private render(state: ViewState): void {
        this.overlay.textContent = "";
        this.overlay.style.display = "none";
        if (state.fullscreenPrompt) {
            this.overlay.style.display = "block";
            this.overlay.textContent =
                "Full screen is required. Return to full screen to continue; " +
                "the current pair will replay.";
        }
        switch (state.phase) {
            case "consent":
                this.status.textContent = "Welcome. Review the consent form to begin.";
                break;
            case "device-check":
                this.status.textContent = "Checking your display ...";
                break;
            case "preload":
                this.status.textContent =
                    `Loading stimuli ... ${Math.round(state.preloadProgress * 100)}%`;
                break;
            case "instructions":
                this.status.textContent =
                    "Rate how impaired the right-hand model looks next to the left-hand " +
                    "reference. Training starts first.";
                break;
            case "training":
                this.status.textContent =
                    `Training ${state.trainingIndex + 1} / ${state.trainingCount}`;
                break;
            case "rating":
                this.status.textContent = `Item ${state.slotIndex + 1} / ${state.slotCount}`;
                break;
            case "done":
                this.status.textContent = `Finished. Your completion code: ${state.completionCode}`;
                break;
            case "failed":
                this.status.textContent = `Something went wrong: ${state.error}`;
                break;
        }
        if (state.refMedia && state.distMedia) {
            if (this.refVideo.src !== state.refMedia) {
                this.refVideo.src = state.refMedia;
                this.distVideo.src = state.distMedia;
            }
        }
        const scaleVisible = state.phase === "rating" || state.highlightedScore !== null;
        this.scale.style.display = scaleVisible ? "flex" : "none";
        for (const button of this.buttons) {
            button.disabled = !state.ratingEnabled;
            const highlighted = state.highlightedScore !== null &&
                button.dataset["score"] === String(state.highlightedScore);
            button.classList.toggle("highlighted", highlighted);
        }
        if (state.phase === "done" && state.completionCode) {
            const code = el("code", "completion-code", state.completionCode);
            const hint = el("div", "copy-hint", "Copy this code to claim your reward.");
            this.status.appendChild(el("br"));
            this.status.appendChild(code);
            this.status.appendChild(hint);
        }
    }
}
