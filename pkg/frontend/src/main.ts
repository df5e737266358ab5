// Console bootstrap: search form, result panes, player overlay with live
// frame indicator, and the submission review page, all against one service.

import { ApiClient, ApiError, type VideoInfo } from "./api";
import { FrameTracker, htmlVideoSource, type ConfirmedFrame } from "./player";
import {
  frameGroupsView,
  renderErrorBanner,
  renderFrameGroups,
  renderSummaries,
  renderTemporalCards,
  renderTranscriptMatches,
  summariesView,
  temporalCardsView,
  transcriptMatchesView,
} from "./results";
import { SearchSession, type SearchMode } from "./session";
import { SubmissionPage, renderSubmissionTable } from "./submission";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";

const api = new ApiClient(SERVICE_URL);
const session = new SearchSession(api);
const submission = new SubmissionPage(api, "session-query");

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const resultsPane = byId<HTMLDivElement>("results");
const playerPane = byId<HTMLDivElement>("player");
const submissionPane = byId<HTMLDivElement>("submission");
const indicator = byId<HTMLSpanElement>("frame-indicator");
const historyList = byId<HTMLUListElement>("history");

let tracker: FrameTracker | null = null;
let playingVideo: VideoInfo | null = null;

async function openPlayer(videoId: string, startS: number): Promise<void> {
  playerPane.replaceChildren();
  tracker?.stop();
  playingVideo = await api.video(videoId);

  const heading = document.createElement("h3");
  heading.textContent = `${playingVideo.title ?? videoId} (${playingVideo.fps} fps)`;
  playerPane.append(heading);

  // the service never proxies video bytes; play straight from the source url
  const video = document.createElement("video");
  video.controls = true;
  video.src = playingVideo.source_url;
  playerPane.append(video);

  const source = htmlVideoSource(video, startS);
  if (source === null) {
    const fallback = document.createElement("p");
    fallback.className = "player-fallback";
    fallback.textContent = `player unavailable; seek manually to ${startS.toFixed(2)}s`;
    playerPane.append(fallback);
    return;
  }
  tracker = new FrameTracker(videoId, playingVideo.fps, source, (frame) => {
    indicator.textContent = String(frame);
  });
  tracker.start();
}

async function confirmCurrentFrame(): Promise<void> {
  if (!tracker) return;
  const confirmed: ConfirmedFrame = tracker.confirm();
  await submission.add(confirmed);
  renderSubmission();
}

function renderSubmission(): void {
  renderSubmissionTable(submissionPane, submission, {
    onRemove: (rank) => {
      submission.remove(rank);
      renderSubmission();
    },
    onBuild: () => {
      void submission
        .build()
        .then(() => window.open(submission.archiveUrl(), "_blank"))
        .catch((error) => showError(error));
    },
  });
}

function showError(error: unknown): void {
  if (error instanceof ApiError) {
    renderErrorBanner(resultsPane, error.code, error.message);
  } else {
    renderErrorBanner(resultsPane, "client_error", String(error));
  }
}

function renderHistory(): void {
  historyList.replaceChildren();
  for (const entry of session.history.slice(-10)) {
    const item = document.createElement("li");
    item.textContent =
      entry.mode === "temporal" ? `${entry.mode}: ${entry.query} → ${entry.query2}` : `${entry.mode}: ${entry.query}`;
    historyList.append(item);
  }
}

async function runSearch(): Promise<void> {
  try {
    const results = await session.run();
    renderHistory();
    if (results === null) return; // superseded by a newer query
    switch (results.mode) {
      case "frames":
        renderFrameGroups(resultsPane, frameGroupsView(results.response), {
          onPlay: (videoId, t) => void openPlayer(videoId, t).catch(showError),
        });
        break;
      case "transcripts":
        renderTranscriptMatches(resultsPane, transcriptMatchesView(results.response), {
          onPlay: (videoId, t) => void openPlayer(videoId, t).catch(showError),
        });
        break;
      case "summaries":
        renderSummaries(resultsPane, summariesView(results.response), (videoIds) => {
          session.applySummaryFilter(videoIds);
          session.mode = "frames";
          void runSearch();
        });
        break;
      case "temporal":
        renderTemporalCards(resultsPane, temporalCardsView(results.response));
        break;
    }
  } catch (error) {
    showError(error);
  }
}

function wireForm(): void {
  const form = byId<HTMLFormElement>("search-form");
  const queryInput = byId<HTMLInputElement>("query");
  const query2Input = byId<HTMLInputElement>("query2");
  const keywordInput = byId<HTMLInputElement>("keyword");
  const modeSelect = byId<HTMLSelectElement>("mode");

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    session.mode = modeSelect.value as SearchMode;
    session.query = queryInput.value;
    session.query2 = query2Input.value;
    session.keyword = keywordInput.value;
    void runSearch();
  });

  byId<HTMLButtonElement>("clear-filter").addEventListener("click", () => {
    session.clearSummaryFilter();
  });
  byId<HTMLButtonElement>("confirm-frame").addEventListener("click", () => {
    void confirmCurrentFrame().catch(showError);
  });
}

wireForm();
renderSubmission();
void api
  .health()
  .then((health) => {
    byId<HTMLSpanElement>("health").textContent =
      `${health.videos} videos · ${health.keyframes} keyframes indexed`;
  })
  .catch(showError);
