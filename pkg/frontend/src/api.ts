// Typed client for the retrieval service. The console never computes scores
// or ranking itself: everything rendered comes straight out of these bodies.

export interface SearchHit {
  id: string;
  score: number;
  metadata: Record<string, string>;
}

export interface FrameGroup {
  video_id: string;
  group_score: number;
  hits: SearchHit[];
}

export interface FramesResponse {
  groups: FrameGroup[];
}

export interface KeyframeInfo {
  keyframe_id: string;
  video_id: string;
  frame_index: number;
  timestamp_s: number;
}

export interface TranscriptMatch {
  hit: SearchHit;
  keyframes: KeyframeInfo[];
}

export interface TranscriptsResponse {
  matches: TranscriptMatch[];
}

export interface SummaryMatch {
  video_id: string;
  summary_text: string;
  score: number;
}

export interface SummariesResponse {
  matches: SummaryMatch[];
}

export interface TemporalPair {
  t1_s: number;
  t2_s: number;
  kf1: string;
  kf2: string;
  s1: number;
  s2: number;
  pair_score: number;
}

export interface TemporalVideo {
  video_id: string;
  s_video: number;
  s_pair: number;
  avg_top1: number;
  avg_top2: number;
  best_pair: TemporalPair;
}

export interface TemporalResponse {
  videos: TemporalVideo[];
}

export interface VideoInfo {
  video_id: string;
  fps: number;
  duration_s: number;
  source_url: string;
  title: string | null;
}

export interface VerifyResponse {
  video_id: string;
  frame_index: number;
  ok: boolean;
  timestamp_s: number;
  max_frame: number;
  reason: string | null;
}

export interface SubmissionItem {
  rank: number;
  video_id: string;
  frame_index: number;
  answer?: string;
}

export interface BuildResponse {
  archive: string;
  query_id: string;
  n_items: number;
}

export interface HealthResponse {
  status: string;
  keyframes: number;
  transcripts: number;
  summaries: number;
  videos: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown";
  let message = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; message?: string };
    if (body.error) code = body.error;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request("/health");
  }

  searchFrames(query: string, k?: number, allowedVideos?: string[]): Promise<FramesResponse> {
    return this.post("/search/frames", {
      query,
      ...(k !== undefined ? { k } : {}),
      ...(allowedVideos !== undefined ? { allowed_videos: allowedVideos } : {}),
    });
  }

  searchTranscripts(query: string, keyword?: string, k?: number): Promise<TranscriptsResponse> {
    return this.post("/search/transcripts", {
      query,
      ...(keyword ? { keyword } : {}),
      ...(k !== undefined ? { k } : {}),
    });
  }

  searchSummaries(query: string, k?: number): Promise<SummariesResponse> {
    return this.post("/search/summaries", { query, ...(k !== undefined ? { k } : {}) });
  }

  searchTemporal(e1: string, e2: string, maxGapS?: number): Promise<TemporalResponse> {
    return this.post("/search/temporal", {
      e1,
      e2,
      ...(maxGapS !== undefined ? { max_gap_s: maxGapS } : {}),
    });
  }

  video(videoId: string): Promise<VideoInfo> {
    return this.request(`/videos/${encodeURIComponent(videoId)}`);
  }

  verifyFrame(videoId: string, frameIndex: number): Promise<VerifyResponse> {
    return this.post("/submission/verify", { video_id: videoId, frame_index: frameIndex });
  }

  buildSubmission(queryId: string, items: SubmissionItem[]): Promise<BuildResponse> {
    return this.post("/submission/build", { query_id: queryId, items });
  }

  archiveUrl(): string {
    return `${this.baseUrl}/submission/archive`;
  }

  async fetchArchive(): Promise<ArrayBuffer> {
    const response = await this.fetchImpl(this.archiveUrl());
    if (!response.ok) {
      throw await parseError(response);
    }
    return response.arrayBuffer();
  }
}
