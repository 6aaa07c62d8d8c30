/** Payloads of the study service API, mirrored from its documentation. */

export interface DeviceReport {
    width: number;
    height: number;
    fullscreen: boolean;
}

export interface SlotView {
    stimulus_id: string;
    ref_media: string;
    dist_media: string;
}

export interface SessionView {
    session_id: string;
    playlist_id: number;
    state: string;
    expected_slot: number;
    slots: SlotView[];
}

export interface TrainingItem {
    stimulus_id: string;
    ref_media: string;
    dist_media: string;
    expected_score: number;
}

export interface PlaylistView {
    playlist_id: number;
    training: TrainingItem[];
    items: SlotView[];
}

export interface VotePayload {
    session_id: string;
    slot: number;
    stimulus_id: string;
    score: number;
    playback_complete: boolean;
    latency_ms: number;
}

export interface VoteAck {
    ok: boolean;
    next_slot: number | null;
}

export type Phase =
    | "consent"
    | "device-check"
    | "preload"
    | "instructions"
    | "training"
    | "rating"
    | "done"
    | "failed";

/** Everything a renderer needs to draw one frame of the experiment. */
export interface ViewState {
    phase: Phase;
    /** pair currently on screen, if any */
    refMedia: string | null;
    distMedia: string | null;
    /** 0..1 while preloading */
    preloadProgress: number;
    /** scale interaction is allowed (only after full playback) */
    ratingEnabled: boolean;
    /** training only: the score to show highlighted; input is ignored */
    highlightedScore: number | null;
    slotIndex: number;
    slotCount: number;
    trainingIndex: number;
    trainingCount: number;
    completionCode: string | null;
    /** fullscreen was abandoned: playback pauses behind a prompt */
    fullscreenPrompt: boolean;
    error: string | null;
}

/** The five-level impairment scale, shown worst-last like the service expects. */
export const SCALE_LABELS: ReadonlyArray<{ score: number; label: string }> = [
    { score: 5, label: "Imperceptible" },
    { score: 4, label: "Perceptible but not annoying" },
    { score: 3, label: "Slightly annoying" },
    { score: 2, label: "Annoying" },
    { score: 1, label: "Very annoying" },
];
