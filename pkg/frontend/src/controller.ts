/** The experiment state machine, independent of any rendering layer.
 *
 * The contract the tests pin down: all pair media preloads before the test
 * starts, training items display their expected score with input ignored,
 * the rating scale unlocks only after the full playback window, votes go
 * out strictly in the service-issued slot order, and the completion code is
 * surfaced at the end. Golden units arrive as ordinary slots and are never
 * treated specially here.
 */

import { Scheduler, ServiceError, StudyApi, realScheduler } from "./api";
import { Phase, PlaylistView, SessionView, ViewState } from "./types";

export interface DeviceInfo {
    width: number;
    height: number;
    fullscreen: boolean;
    canDecodeMedia: boolean;
}

/** Resolves when the media at url is fetched and decodable. */
export type MediaLoader = (url: string) => Promise<void>;

export interface ControllerOptions {
    playbackMs?: number; // full pair playback window (8 s)
    trainingHighlightMs?: number; // highlighted-score display (5 s)
    scheduler?: Scheduler;
    mediaLoader?: MediaLoader;
}

const PLAYBACK_MS = 8000;
const TRAINING_HIGHLIGHT_MS = 5000;

type Listener = (state: ViewState) => void;

export class SessionController {
    private readonly playbackMs: number;
    private readonly highlightMs: number;
    private readonly scheduler: Scheduler;
    private readonly loadMedia: MediaLoader;
    private readonly listeners: Listener[] = [];

    private session: SessionView | null = null;
    private playlist: PlaylistView | null = null;
    private state: ViewState = {
        phase: "consent",
        refMedia: null,
        distMedia: null,
        preloadProgress: 0,
        ratingEnabled: false,
        highlightedScore: null,
        slotIndex: 0,
        slotCount: 0,
        trainingIndex: 0,
        trainingCount: 0,
        completionCode: null,
        fullscreenPrompt: false,
        error: null,
    };

    private fullscreenLost = false;
    private lostDuringWindow = false;
    private fullscreenWaiters: Array<() => void> = [];
    private ratingEnabledAt = 0;
    private voteInFlight = false;

    constructor(private readonly api: StudyApi, options: ControllerOptions = {}) {
        this.playbackMs = options.playbackMs ?? PLAYBACK_MS;
        this.highlightMs = options.trainingHighlightMs ?? TRAINING_HIGHLIGHT_MS;
        this.scheduler = options.scheduler ?? realScheduler;
        this.loadMedia = options.mediaLoader ?? (() => Promise.resolve());
    }

    getState(): ViewState {
        return { ...this.state };
    }

    subscribe(listener: Listener): void {
        this.listeners.push(listener);
    }

    private update(patch: Partial<ViewState>): void {
        this.state = { ...this.state, ...patch };
        for (const listener of this.listeners) {
            listener(this.getState());
        }
    }

    private fail(error: unknown): void {
        this.update({ phase: "failed", error: String(error) });
    }

    /** Consent accepted: run device check, create the session, preload. */
    async start(device: DeviceInfo): Promise<void> {
        this.update({ phase: "device-check" });
        if (!device.canDecodeMedia) {
            this.fail("this browser cannot decode the stimulus media");
            return;
        }
        if (device.width < 1920 || device.height < 1080 || !device.fullscreen) {
            this.fail(`device check failed: ${device.width}x${device.height}, ` +
                `fullscreen=${device.fullscreen}`);
            return;
        }
        try {
            this.session = await this.api.createSession({
                width: device.width,
                height: device.height,
                fullscreen: device.fullscreen,
            });
            this.playlist = await this.api.playlist(this.session.playlist_id);
        } catch (error) {
            this.fail(error);
            return;
        }
        this.update({
            phase: "preload",
            slotCount: this.session.slots.length,
            trainingCount: this.playlist.training.length,
        });
        await this.preloadAll();
        this.update({ phase: "instructions" });
    }

    /** Every ref/dist pair (training included) loads before the test begins. */
    private async preloadAll(): Promise<void> {
        const urls: string[] = [];
        for (const item of this.playlist!.training) {
            urls.push(item.ref_media, item.dist_media);
        }
        for (const slot of this.session!.slots) {
            urls.push(slot.ref_media, slot.dist_media);
        }
        let loaded = 0;
        for (const url of urls) {
            await this.loadMedia(this.api.mediaUrl(url));
            loaded += 1;
            this.update({ preloadProgress: loaded / urls.length });
        }
    }

    /** From the instructions screen into training, then the rated test.
     * Resolves once the rating phase begins; slots present in the background.
     */
    async beginTest(): Promise<void> {
        if (this.state.phase !== "instructions") {
            return;
        }
        try {
            await this.runTraining();
            await this.api.startRating(this.session!.session_id);
            this.update({ phase: "rating", slotIndex: 0 });
            this.startSlot(0);
        } catch (error) {
            this.fail(error);
        }
    }

    private startSlot(index: number): void {
        this.presentSlot(index).catch((error) => this.fail(error));
    }

    private async runTraining(): Promise<void> {
        this.update({ phase: "training" });
        const items = this.playlist!.training;
        for (let i = 0; i < items.length; i++) {
            const item = items[i];
            this.update({
                trainingIndex: i,
                refMedia: item.ref_media,
                distMedia: item.dist_media,
                ratingEnabled: false,
                highlightedScore: null,
            });
            await this.playbackWindow();
            // the proposed score lights up; any input stays ignored
            this.update({ highlightedScore: item.expected_score });
            await this.scheduler.wait(this.highlightMs);
            this.update({ highlightedScore: null });
        }
    }

    private async presentSlot(index: number): Promise<void> {
        const slot = this.session!.slots[index];
        this.update({
            slotIndex: index,
            refMedia: slot.ref_media,
            distMedia: slot.dist_media,
            ratingEnabled: false,
        });
        await this.playbackWindow();
        this.ratingEnabledAt = this.scheduler.now();
        this.update({ ratingEnabled: true });
    }

    /** Full playback of both stimuli; leaving fullscreen restarts the pair. */
    private async playbackWindow(): Promise<void> {
        for (;;) {
            this.lostDuringWindow = this.fullscreenLost;
            await this.scheduler.wait(this.playbackMs);
            if (!this.lostDuringWindow) {
                return;
            }
            await this.whenFullscreenRestored();
        }
    }

    private whenFullscreenRestored(): Promise<void> {
        if (!this.fullscreenLost) {
            return Promise.resolve();
        }
        return new Promise((resolve) => this.fullscreenWaiters.push(resolve));
    }

    /** The renderer reports fullscreen transitions here. */
    fullscreenChanged(active: boolean): void {
        this.fullscreenLost = !active;
        if (!active) {
            this.lostDuringWindow = true;
            this.update({ fullscreenPrompt: true });
        } else {
            this.update({ fullscreenPrompt: false });
            const waiters = this.fullscreenWaiters.splice(0);
            for (const resolve of waiters) {
                resolve();
            }
        }
    }

    /**
     * Score the current pair. Returns false (and does nothing) while the
     * scale is locked: before 8 s of playback, during training, and while a
     * vote is on the wire.
     */
    async rate(score: number): Promise<boolean> {
        if (this.state.phase !== "rating" || !this.state.ratingEnabled || this.voteInFlight) {
            return false;
        }
        if (!Number.isInteger(score) || score < 1 || score > 5) {
            return false;
        }
        const index = this.state.slotIndex;
        const slot = this.session!.slots[index];
        this.voteInFlight = true;
        this.update({ ratingEnabled: false });
        try {
            await this.api.submitVote({
                session_id: this.session!.session_id,
                slot: index,
                stimulus_id: slot.stimulus_id,
                score,
                playback_complete: true,
                latency_ms: Math.max(0, Math.round(this.scheduler.now() - this.ratingEnabledAt)),
            });
        } catch (error) {
            // a lost ack that was retried can come back as a duplicate; the
            // service has the vote, so move on
            if (!(error instanceof ServiceError && error.kind === "DuplicateVote")) {
                this.voteInFlight = false;
                this.fail(error);
                return false;
            }
        }
        this.voteInFlight = false;
        if (index + 1 < this.session!.slots.length) {
            this.startSlot(index + 1);
        } else {
            try {
                const result = await this.api.complete(this.session!.session_id);
                this.update({
                    phase: "done",
                    completionCode: result.code,
                    refMedia: null,
                    distMedia: null,
                });
            } catch (error) {
                this.fail(error);
            }
        }
        return true;
    }
}
