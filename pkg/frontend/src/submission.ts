// Submission review page: confirmed frames are re-verified through the
// service, unverified rows can never reach the archive, and rebuilding
// replaces the query's CSV wholesale (so removals take effect).

import type { ApiClient, BuildResponse, VerifyResponse } from "./api";
import type { ConfirmedFrame } from "./player";

export interface SubmissionRow {
  rank: number;
  videoId: string;
  frameIndex: number;
  answer?: string;
  verification: VerifyResponse | null; // null until verified
}

export class SubmissionPage {
  private rows: SubmissionRow[] = [];

  constructor(
    private readonly api: ApiClient,
    readonly queryId: string,
  ) {}

  list(): readonly SubmissionRow[] {
    return this.rows;
  }

  /** Append a confirmed frame and verify it against the service. */
  async add(frame: ConfirmedFrame, answer?: string): Promise<SubmissionRow> {
    const row: SubmissionRow = {
      rank: this.rows.length + 1,
      videoId: frame.videoId,
      frameIndex: frame.frameIndex,
      ...(answer !== undefined ? { answer } : {}),
      verification: null,
    };
    this.rows.push(row);
    row.verification = await this.api.verifyFrame(row.videoId, row.frameIndex);
    return row;
  }

  /** Drop one row and close the rank gap. */
  remove(rank: number): void {
    this.rows = this.rows
      .filter((row) => row.rank !== rank)
      .map((row, index) => ({ ...row, rank: index + 1 }));
  }

  /** Rows that passed verification; only these may be built. */
  verifiedRows(): SubmissionRow[] {
    return this.rows.filter((row) => row.verification?.ok === true);
  }

  canBuild(): boolean {
    return this.rows.length > 0 && this.rows.every((row) => row.verification?.ok === true);
  }

  /**
   * Build (or rebuild) this query's CSV in the archive. Refuses locally when
   * any row is unverified; the service re-verifies anyway.
   */
  async build(): Promise<BuildResponse> {
    if (!this.canBuild()) {
      throw new Error("all rows must pass verification before building");
    }
    return this.api.buildSubmission(
      this.queryId,
      this.rows.map((row) => ({
        rank: row.rank,
        video_id: row.videoId,
        frame_index: row.frameIndex,
        ...(row.answer !== undefined ? { answer: row.answer } : {}),
      })),
    );
  }

  archiveUrl(): string {
    return this.api.archiveUrl();
  }
}

// -- DOM layer ----------------------------------------------------------------

export function renderSubmissionTable(
  container: HTMLElement,
  page: SubmissionPage,
  callbacks: { onRemove?: (rank: number) => void; onBuild?: () => void } = {},
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const table = doc.createElement("table");
  table.className = "submission-table";
  const head = doc.createElement("tr");
  for (const label of ["rank", "video", "frame", "answer", "status", ""]) {
    const th = doc.createElement("th");
    th.textContent = label;
    head.append(th);
  }
  table.append(head);
  for (const row of page.list()) {
    const tr = doc.createElement("tr");
    tr.dataset.rank = String(row.rank);
    const status =
      row.verification === null
        ? "verifying…"
        : row.verification.ok
          ? `ok @ ${row.verification.timestamp_s.toFixed(2)}s`
          : `failed: ${row.verification.reason ?? "unknown"}`;
    tr.className = row.verification?.ok ? "row-verified" : "row-unverified";
    for (const text of [
      String(row.rank),
      row.videoId,
      String(row.frameIndex),
      row.answer ?? "",
      status,
    ]) {
      const td = doc.createElement("td");
      td.textContent = text;
      tr.append(td);
    }
    const actions = doc.createElement("td");
    const removeButton = doc.createElement("button");
    removeButton.textContent = "remove";
    removeButton.className = "remove-row";
    removeButton.addEventListener("click", () => callbacks.onRemove?.(row.rank));
    actions.append(removeButton);
    tr.append(actions);
    table.append(tr);
  }
  container.append(table);

  const build = doc.createElement("button");
  build.className = "build-archive";
  build.textContent = "Build archive";
  build.disabled = !page.canBuild();
  build.addEventListener("click", () => callbacks.onBuild?.());
  container.append(build);
}
