import { describe, expect, it } from "vitest";

import { StudyApi } from "../src/api";
import { DeviceInfo, SessionController } from "../src/controller";
import { ViewState } from "../src/types";
import { FakeScheduler, StubService } from "./stub";

const GOOD_DEVICE: DeviceInfo = {
    width: 1920,
    height: 1080,
    fullscreen: true,
    canDecodeMedia: true,
};

function makeRig(options: { slotCount?: number } = {}) {
    const stub = new StubService({ slotCount: options.slotCount ?? 33 });
    const scheduler = new FakeScheduler();
    const loaded: string[] = [];
    const api = new StudyApi("http://stub", stub.http, scheduler);
    const controller = new SessionController(api, {
        scheduler,
        mediaLoader: (url) => {
            loaded.push(url);
            return Promise.resolve();
        },
    });
    const states: ViewState[] = [];
    controller.subscribe((state) => states.push(state));
    return { stub, scheduler, controller, states, loaded };
}

type Rig = ReturnType<typeof makeRig>;

/** Consent through training; ends in rating with slot 0's playback pending. */
async function intoRating(rig: Rig): Promise<void> {
    await rig.controller.start(GOOD_DEVICE);
    expect(rig.controller.getState().phase).toBe("instructions");
    const testRun = rig.controller.beginTest();
    for (let i = 0; i < 5; i++) {
        await rig.scheduler.advance(8000); // pair playback
        await rig.scheduler.advance(5000); // highlighted score
    }
    await rig.scheduler.advance(0);
    await testRun;
    expect(rig.controller.getState().phase).toBe("rating");
}

describe("device gate and preloading", () => {
    it("rejects small screens before touching the service", async () => {
        const rig = makeRig();
        await rig.controller.start({ ...GOOD_DEVICE, width: 1366, height: 768 });
        expect(rig.controller.getState().phase).toBe("failed");
        expect(rig.stub.requests).toHaveLength(0);
    });

    it("rejects windowed and media-incapable browsers", async () => {
        const windowed = makeRig();
        await windowed.controller.start({ ...GOOD_DEVICE, fullscreen: false });
        expect(windowed.controller.getState().phase).toBe("failed");

        const noMedia = makeRig();
        await noMedia.controller.start({ ...GOOD_DEVICE, canDecodeMedia: false });
        expect(noMedia.controller.getState().phase).toBe("failed");
        expect(noMedia.stub.requests).toHaveLength(0);
    });

    it("preloads every pair before the instructions screen", async () => {
        const rig = makeRig();
        const progress: number[] = [];
        rig.controller.subscribe((state) => progress.push(state.preloadProgress));
        await rig.controller.start(GOOD_DEVICE);
        // 33 slots + 5 training items, two media files each
        expect(rig.loaded).toHaveLength(2 * (33 + 5));
        expect(rig.controller.getState().preloadProgress).toBe(1);
        expect(rig.controller.getState().phase).toBe("instructions");
        const increasing = progress.every((v, i) => i === 0 || v >= progress[i - 1]);
        expect(increasing).toBe(true);
    });
});

describe("training phase", () => {
    it("highlights the expected score for each item and ignores input", async () => {
        const rig = makeRig();
        await rig.controller.start(GOOD_DEVICE);
        const run = rig.controller.beginTest();
        const highlighted: number[] = [];
        rig.controller.subscribe((state) => {
            if (state.phase === "training" && state.highlightedScore !== null) {
                if (highlighted[highlighted.length - 1] !== state.highlightedScore) {
                    highlighted.push(state.highlightedScore);
                }
            }
        });
        for (let i = 0; i < 5; i++) {
            await rig.scheduler.advance(8000);
            // rating input during training must be ignored entirely
            expect(await rig.controller.rate(3)).toBe(false);
            expect(rig.controller.getState().highlightedScore).toBe(i + 1);
            await rig.scheduler.advance(5000);
        }
        await rig.scheduler.advance(0);
        await run;
        expect(highlighted).toEqual([1, 2, 3, 4, 5]);
        expect(rig.stub.votes).toHaveLength(0);
        expect(rig.controller.getState().phase).toBe("rating");
    });
});

describe("rating phase", () => {
    it("keeps the scale locked before 8 s of playback", async () => {
        const rig = makeRig();
        await intoRating(rig);

        await rig.scheduler.advance(3000); // 3 s into slot 0's playback
        const early = rig.controller.getState();
        expect(early.slotIndex).toBe(0);
        expect(early.ratingEnabled).toBe(false);
        expect(await rig.controller.rate(5)).toBe(false); // ignored
        expect(rig.stub.votes).toHaveLength(0);

        await rig.scheduler.advance(5000); // the full 8 s elapsed
        expect(rig.controller.getState().ratingEnabled).toBe(true);
        expect(await rig.controller.rate(5)).toBe(true);
        expect(rig.stub.votes).toHaveLength(1);
        expect(rig.stub.votes[0].playback_complete).toBe(true);
    });

    it("runs a full 33-item session in service order and shows the code", async () => {
        const rig = makeRig();
        await intoRating(rig);
        for (let slot = 0; slot < 33; slot++) {
            await rig.scheduler.advance(8000);
            expect(rig.controller.getState().ratingEnabled).toBe(true);
            const accepted = await rig.controller.rate(1 + (slot % 5));
            expect(accepted).toBe(true);
        }
        await rig.scheduler.advance(0);

        expect(rig.stub.votes).toHaveLength(33);
        expect(rig.stub.schemaErrors).toEqual([]);
        expect(rig.stub.votes.map((v) => v.slot)).toEqual(
            Array.from({ length: 33 }, (_, i) => i),
        );
        expect(rig.stub.votes.map((v) => v.stimulus_id)).toEqual(
            rig.stub.slots.map((s) => s.stimulus_id),
        );
        expect(rig.stub.completed).toBe(true);
        const final = rig.controller.getState();
        expect(final.phase).toBe("done");
        expect(final.completionCode).toBe("c0ffee123456");
    });

    it("records rating latency from the moment the scale unlocks", async () => {
        const rig = makeRig();
        await intoRating(rig);
        await rig.scheduler.advance(8000);
        await rig.scheduler.advance(2500); // think for 2.5 s
        await rig.controller.rate(3);
        expect(rig.stub.votes[0].latency_ms).toBe(2500);
    });

    it("ignores out-of-range scores", async () => {
        const rig = makeRig();
        await intoRating(rig);
        await rig.scheduler.advance(8000);
        expect(await rig.controller.rate(0)).toBe(false);
        expect(await rig.controller.rate(6)).toBe(false);
        expect(await rig.controller.rate(2.5)).toBe(false);
        expect(rig.stub.votes).toHaveLength(0);
        expect(await rig.controller.rate(2)).toBe(true);
    });
});

describe("failure handling", () => {
    it("retries votes over transient network failures and resumes", async () => {
        const rig = makeRig({ slotCount: 3 });
        await intoRating(rig);
        await rig.scheduler.advance(8000);

        rig.stub.failNextRequests = 2; // two dropped connections
        const votePromise = rig.controller.rate(4);
        await rig.scheduler.advance(500); // first backoff
        await rig.scheduler.advance(1000); // second backoff
        expect(await votePromise).toBe(true);
        expect(rig.stub.votes).toHaveLength(1);
        const state = rig.controller.getState();
        expect(state.slotIndex).toBe(1); // resumed at the pending slot
        expect(state.phase).toBe("rating");
    });

    it("treats a duplicate ack as delivered and moves on", async () => {
        const rig = makeRig({ slotCount: 2 });
        await intoRating(rig);
        await rig.scheduler.advance(8000);
        // the service already holds slot 0 (an ack was lost earlier)
        rig.stub.votes.push({
            session_id: "s000000", slot: 0, stimulus_id: "stim00",
            score: 3, playback_complete: true, latency_ms: 0,
        });
        rig.stub.expectedSlot = 1;
        expect(await rig.controller.rate(2)).toBe(true);
        expect(rig.controller.getState().slotIndex).toBe(1);
        expect(rig.controller.getState().phase).toBe("rating");
    });

    it("pauses behind a prompt when fullscreen is lost and replays the pair", async () => {
        const rig = makeRig({ slotCount: 2 });
        await intoRating(rig);
        await rig.scheduler.advance(8000);
        expect(rig.controller.getState().ratingEnabled).toBe(true);
        await rig.controller.rate(3);

        // leave fullscreen 2 s into slot 1's playback
        await rig.scheduler.advance(2000);
        rig.controller.fullscreenChanged(false);
        expect(rig.controller.getState().fullscreenPrompt).toBe(true);
        await rig.scheduler.advance(6000); // original window elapses, still locked
        expect(rig.controller.getState().ratingEnabled).toBe(false);

        rig.controller.fullscreenChanged(true);
        expect(rig.controller.getState().fullscreenPrompt).toBe(false);
        await rig.scheduler.advance(7999); // replayed window, not yet complete
        expect(rig.controller.getState().ratingEnabled).toBe(false);
        await rig.scheduler.advance(1);
        expect(rig.controller.getState().ratingEnabled).toBe(true);
        expect(await rig.controller.rate(4)).toBe(true);
    });

    it("fails the session visibly when the service rejects the order", async () => {
        const rig = makeRig({ slotCount: 2 });
        await intoRating(rig);
        await rig.scheduler.advance(8000);
        rig.stub.expectedSlot = 2; // service thinks everything is done
        expect(await rig.controller.rate(3)).toBe(true); // duplicate: tolerated
        rig.stub.expectedSlot = 0; // now the service demands an earlier slot
        await rig.scheduler.advance(8000);
        expect(await rig.controller.rate(3)).toBe(false);
        expect(rig.controller.getState().phase).toBe("failed");
    });
});
