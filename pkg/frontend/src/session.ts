// One search session per browser tab: mode, queries, keyword refinement,
// the optional summary-filter video set, the last response, and the query
// history. Responses superseded by a newer request in the same session are
// dropped before they ever reach a renderer.

import type {
  ApiClient,
  FramesResponse,
  SummariesResponse,
  TemporalResponse,
  TranscriptsResponse,
} from "./api";

export type SearchMode = "frames" | "transcripts" | "summaries" | "temporal";

export type SearchResults =
  | { mode: "frames"; response: FramesResponse }
  | { mode: "transcripts"; response: TranscriptsResponse }
  | { mode: "summaries"; response: SummariesResponse }
  | { mode: "temporal"; response: TemporalResponse };

export interface HistoryEntry {
  mode: SearchMode;
  query: string;
  query2?: string;
}

export class SearchSession {
  mode: SearchMode = "frames";
  query = "";
  query2 = "";
  keyword = "";
  allowedVideos: string[] | null = null;
  results: SearchResults | null = null;
  readonly history: HistoryEntry[] = [];

  private requestSeq = 0;

  constructor(private readonly api: ApiClient) {}

  /** Restrict subsequent frame searches to videos found via summaries. */
  applySummaryFilter(videoIds: string[]): void {
    this.allowedVideos = [...videoIds];
  }

  clearSummaryFilter(): void {
    this.allowedVideos = null;
  }

  /**
   * Run the current query. Resolves to the results when this request is
   * still the latest one, or null when a newer request superseded it
   * (a stale response must never be rendered).
   */
  async run(): Promise<SearchResults | null> {
    if (!this.query.trim()) {
      throw new Error("query must be non-empty");
    }
    if (this.mode === "temporal" && !this.query2.trim()) {
      throw new Error("temporal search requires both event queries");
    }
    const seq = ++this.requestSeq;
    this.history.push({
      mode: this.mode,
      query: this.query,
      ...(this.mode === "temporal" ? { query2: this.query2 } : {}),
    });

    const results = await this.dispatch();
    if (seq !== this.requestSeq) {
      return null; // superseded while in flight
    }
    this.results = results;
    return results;
  }

  private async dispatch(): Promise<SearchResults> {
    switch (this.mode) {
      case "frames":
        return {
          mode: "frames",
          response: await this.api.searchFrames(
            this.query,
            undefined,
            this.allowedVideos ?? undefined,
          ),
        };
      case "transcripts":
        return {
          mode: "transcripts",
          response: await this.api.searchTranscripts(this.query, this.keyword || undefined),
        };
      case "summaries":
        return { mode: "summaries", response: await this.api.searchSummaries(this.query) };
      case "temporal":
        return {
          mode: "temporal",
          response: await this.api.searchTemporal(this.query, this.query2),
        };
    }
  }
}
