/** Typed client for the study service with retry/backoff on network failure. */

import {
    DeviceReport,
    PlaylistView,
    SessionView,
    VoteAck,
    VotePayload,
} from "./types";

export interface HttpResponse {
    status: number;
    json(): Promise<unknown>;
}

export type HttpFn = (url: string, init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
}) => Promise<HttpResponse>;

export interface Scheduler {
    now(): number;
    wait(ms: number): Promise<void>;
}

export const realScheduler: Scheduler = {
    now: () => Date.now(),
    wait: (ms) => new Promise((resolve) => setTimeout(resolve, ms)),
};

export class ServiceError extends Error {
    constructor(public readonly status: number, public readonly kind: string, detail: string) {
        super(`${kind}: ${detail}`);
    }
}

const RETRIES = 5;
const BACKOFF_MS = 500;

export class StudyApi {
    constructor(
        private readonly baseUrl: string,
        private readonly http: HttpFn,
        private readonly scheduler: Scheduler = realScheduler,
    ) {}

    /**
     * POST with retry and exponential backoff. Transport failures and 5xx
     * responses retry; 4xx service verdicts surface immediately so the
     * caller can resume from the service's view of the session.
     */
    private async post(path: string, body?: unknown): Promise<unknown> {
        let lastError: Error = new Error("unreachable");
        for (let attempt = 0; attempt < RETRIES; attempt++) {
            if (attempt > 0) {
                await this.scheduler.wait(BACKOFF_MS * 2 ** (attempt - 1));
            }
            try {
                const response = await this.http(this.baseUrl + path, {
                    method: "POST",
                    headers: { "Content-Type": "application/json" },
                    body: body === undefined ? undefined : JSON.stringify(body),
                });
                if (response.status >= 500) {
                    lastError = new Error(`server error ${response.status}`);
                    continue;
                }
                const payload = (await response.json()) as Record<string, unknown>;
                if (response.status >= 400) {
                    throw new ServiceError(
                        response.status,
                        String(payload["error"] ?? "ServiceError"),
                        String(payload["detail"] ?? ""),
                    );
                }
                return payload;
            } catch (error) {
                if (error instanceof ServiceError) {
                    throw error;
                }
                lastError = error as Error;
            }
        }
        throw lastError;
    }

    private async get(path: string): Promise<unknown> {
        const response = await this.http(this.baseUrl + path);
        const payload = (await response.json()) as Record<string, unknown>;
        if (response.status >= 400) {
            throw new ServiceError(
                response.status,
                String(payload["error"] ?? "ServiceError"),
                String(payload["detail"] ?? ""),
            );
        }
        return payload;
    }

    createSession(device: DeviceReport): Promise<SessionView> {
        return this.post("/api/session", { device }) as Promise<SessionView>;
    }

    playlist(id: number): Promise<PlaylistView> {
        return this.get(`/api/playlist/${id}`) as Promise<PlaylistView>;
    }

    startRating(sessionId: string): Promise<SessionView> {
        return this.post(`/api/session/${sessionId}/start`) as Promise<SessionView>;
    }

    submitVote(payload: VotePayload): Promise<VoteAck> {
        return this.post("/api/vote", payload) as Promise<VoteAck>;
    }

    complete(sessionId: string): Promise<{ code: string }> {
        return this.post(`/api/session/${sessionId}/complete`) as Promise<{ code: string }>;
    }

    mediaUrl(path: string): string {
        if (path.startsWith("http://") || path.startsWith("https://") || path.startsWith("/")) {
            return path;
        }
        return `${this.baseUrl}/media/${path}`;
    }
}
