// Result rendering. View models carry exactly what gets displayed (order and
// formatted numbers), so fixture tests can pin them; the DOM layer only
// arranges those strings. Groups are rendered in service order, never
// re-sorted client-side.

import type {
  FramesResponse,
  SummariesResponse,
  TemporalResponse,
  TranscriptsResponse,
} from "./api";
import { formatScore, formatTimestamp } from "./frames";

export interface FrameTileView {
  keyframeId: string;
  videoId: string;
  frameIndex: string;
  score: string;
  imageRef: string;
  timestampS: string;
}

export interface FrameGroupView {
  videoId: string;
  groupScore: string;
  tiles: FrameTileView[];
}

export function frameGroupsView(response: FramesResponse): FrameGroupView[] {
  return response.groups.map((group) => ({
    videoId: group.video_id,
    groupScore: formatScore(group.group_score),
    tiles: group.hits.map((hit) => ({
      keyframeId: hit.id,
      videoId: hit.metadata["video_id"] ?? "",
      frameIndex: hit.metadata["frame_index"] ?? "",
      score: formatScore(hit.score),
      imageRef: hit.metadata["image_ref"] ?? "",
      timestampS: hit.metadata["timestamp_s"] ?? "",
    })),
  }));
}

export interface TranscriptMatchView {
  intervalId: string;
  videoId: string;
  score: string;
  cleanedText: string;
  span: string;
  keyframes: { keyframeId: string; frameIndex: string; timestamp: string; timestampS: number }[];
}

export function transcriptMatchesView(response: TranscriptsResponse): TranscriptMatchView[] {
  return response.matches.map((match) => ({
    intervalId: match.hit.id,
    videoId: match.hit.metadata["video_id"] ?? "",
    score: formatScore(match.hit.score),
    cleanedText: match.hit.metadata["cleaned_text"] ?? "",
    span: `${match.hit.metadata["start_s"] ?? "?"}s – ${match.hit.metadata["end_s"] ?? "?"}s`,
    keyframes: match.keyframes.map((kf) => ({
      keyframeId: kf.keyframe_id,
      frameIndex: String(kf.frame_index),
      timestamp: formatTimestamp(kf.timestamp_s),
      timestampS: kf.timestamp_s,
    })),
  }));
}

export interface SummaryView {
  videoId: string;
  score: string;
  summaryText: string;
}

export function summariesView(response: SummariesResponse): SummaryView[] {
  return response.matches.map((match) => ({
    videoId: match.video_id,
    score: formatScore(match.score),
    summaryText: match.summary_text,
  }));
}

export interface TemporalCardView {
  videoId: string;
  sVideo: string;
  sPair: string;
  pairT1: string;
  pairT2: string;
  kf1: string;
  kf2: string;
}

export function temporalCardsView(response: TemporalResponse): TemporalCardView[] {
  return response.videos.map((video) => ({
    videoId: video.video_id,
    sVideo: formatScore(video.s_video),
    sPair: formatScore(video.s_pair),
    pairT1: formatTimestamp(video.best_pair.t1_s),
    pairT2: formatTimestamp(video.best_pair.t2_s),
    kf1: video.best_pair.kf1,
    kf2: video.best_pair.kf2,
  }));
}

// -- DOM layer ----------------------------------------------------------------

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function emptyState(doc: Document): HTMLElement {
  return el(doc, "p", "empty-state", "No results for this query.");
}

export interface TileCallbacks {
  onPlay?: (videoId: string, timestampS: number) => void;
}

export function renderFrameGroups(
  container: HTMLElement,
  view: FrameGroupView[],
  callbacks: TileCallbacks = {},
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (view.length === 0) {
    container.append(emptyState(doc));
    return;
  }
  for (const group of view) {
    const section = el(doc, "section", "video-group");
    section.dataset.videoId = group.videoId;
    const heading = el(doc, "h3", "group-heading", `${group.videoId} · ${group.groupScore}`);
    section.append(heading);
    const grid = el(doc, "div", "tile-grid");
    for (const tile of group.tiles) {
      const card = el(doc, "figure", "keyframe-tile");
      card.dataset.keyframeId = tile.keyframeId;
      const thumb = el(doc, "div", "thumb-placeholder", tile.imageRef);
      const caption = el(
        doc,
        "figcaption",
        "tile-caption",
        `${tile.videoId} · frame ${tile.frameIndex} · ${tile.score}`,
      );
      card.append(thumb, caption);
      card.addEventListener("click", () => {
        callbacks.onPlay?.(tile.videoId, Number(tile.timestampS));
      });
      grid.append(card);
    }
    section.append(grid);
    container.append(section);
  }
}

export function renderTranscriptMatches(
  container: HTMLElement,
  view: TranscriptMatchView[],
  callbacks: TileCallbacks = {},
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (view.length === 0) {
    container.append(emptyState(doc));
    return;
  }
  for (const match of view) {
    const card = el(doc, "article", "transcript-match");
    card.dataset.intervalId = match.intervalId;
    card.append(
      el(doc, "h3", "match-heading", `${match.videoId} · ${match.score}`),
      el(doc, "p", "match-span", match.span),
      el(doc, "p", "match-text", match.cleanedText),
    );
    const strip = el(doc, "div", "keyframe-strip");
    for (const kf of match.keyframes) {
      const chip = el(doc, "button", "keyframe-chip", `frame ${kf.frameIndex} @ ${kf.timestamp}`);
      chip.dataset.keyframeId = kf.keyframeId;
      chip.addEventListener("click", () => {
        callbacks.onPlay?.(match.videoId, kf.timestampS);
      });
      strip.append(chip);
    }
    card.append(strip);
    container.append(card);
  }
}

export function renderSummaries(
  container: HTMLElement,
  view: SummaryView[],
  onFilter?: (videoIds: string[]) => void,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (view.length === 0) {
    container.append(emptyState(doc));
    return;
  }
  for (const summary of view) {
    const card = el(doc, "article", "summary-card");
    card.dataset.videoId = summary.videoId;
    card.append(
      el(doc, "h3", "match-heading", `${summary.videoId} · ${summary.score}`),
      el(doc, "p", "summary-text", summary.summaryText),
    );
    container.append(card);
  }
  if (onFilter) {
    const button = el(doc, "button", "filter-button", "Filter frame results to these videos");
    button.addEventListener("click", () => onFilter(view.map((s) => s.videoId)));
    container.append(button);
  }
}

export function renderTemporalCards(container: HTMLElement, view: TemporalCardView[]): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (view.length === 0) {
    container.append(emptyState(doc));
    return;
  }
  for (const card of view) {
    const article = el(doc, "article", "temporal-card");
    article.dataset.videoId = card.videoId;
    article.append(
      el(doc, "h3", "match-heading", `${card.videoId} · s_video ${card.sVideo}`),
      el(
        doc,
        "p",
        "pair-line",
        `best pair ${card.pairT1} → ${card.pairT2} (s_pair ${card.sPair})`,
      ),
      el(doc, "p", "pair-frames", `${card.kf1} → ${card.kf2}`),
    );
    container.append(article);
  }
}

/** Service errors surface as dismissible banners, never as blank pages. */
export function renderErrorBanner(container: HTMLElement, code: string, message: string): void {
  const doc = container.ownerDocument;
  const banner = el(doc, "div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.append(el(doc, "strong", "error-code", code), el(doc, "span", "error-message", ` ${message}`));
  const dismiss = el(doc, "button", "dismiss", "×");
  dismiss.addEventListener("click", () => banner.remove());
  banner.append(dismiss);
  container.prepend(banner);
}
