/** DOM layer. Builds the whole interface with createElement and
 * renders exclusively through textContent, so item text is always
 * shown as plain text no matter what it contains. Keyboard shortcuts:
 * J = need, K = no need (ignored while typing in a field).
 */
import { ApiClient } from "./api";
import { LabelSession } from "./session";
import type { SessionApi, SessionState } from "./session";

const STORAGE_KEY = "needminer.labeler";

export interface MountOptions {
  api?: SessionApi;
  storage?: Pick<Storage, "getItem" | "setItem">;
  now?: () => number;
  /** Progress poll period; 0 disables the timer (tests poll manually). */
  pollIntervalMs?: number;
}

export interface MountedApp {
  session: LabelSession;
  /** Poll progress once, outside the timer. */
  refresh(): Promise<void>;
  /** Detach listeners and stop the poll timer. */
  stop(): void;
}

interface Ui {
  signin: HTMLElement;
  handle: HTMLInputElement;
  startButton: HTMLButtonElement;
  signinError: HTMLElement;
  work: HTMLElement;
  itemText: HTMLElement;
  notice: HTMLElement;
  needButton: HTMLButtonElement;
  noNeedButton: HTMLButtonElement;
  banner: HTMLElement;
  bannerText: HTMLElement;
  retryButton: HTMLButtonElement;
  complete: HTMLElement;
  completeText: HTMLElement;
  progress: HTMLElement;
  itemsLine: HTMLElement;
  mineLine: HTMLElement;
  elapsedLine: HTMLElement;
  refreshedLine: HTMLElement;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  id: string,
  text = "",
  className = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.id = id;
  if (text) {
    node.textContent = text;
  }
  if (className) {
    node.className = className;
  }
  return node;
}

function buildUi(root: HTMLElement): Ui {
  const doc = root.ownerDocument;

  const title = doc.createElement("h1");
  title.textContent = "Need labeling";

  const signin = el(doc, "section", "signin");
  const handleLabel = doc.createElement("label");
  handleLabel.htmlFor = "handle";
  handleLabel.textContent = "Your handle";
  const handle = el(doc, "input", "handle");
  handle.type = "text";
  handle.autocomplete = "off";
  const startButton = el(doc, "button", "start", "Start labeling");
  startButton.type = "button";
  const signinError = el(doc, "p", "signin-error", "", "error");
  signin.append(handleLabel, handle, startButton, signinError);

  const work = el(doc, "section", "work");
  const notice = el(doc, "p", "notice");
  const itemText = el(doc, "blockquote", "item-text");
  const voteBar = el(doc, "div", "votebar");
  const needButton = el(doc, "button", "vote-need", "Need (J)");
  needButton.type = "button";
  const noNeedButton = el(doc, "button", "vote-noneed", "No need (K)");
  noNeedButton.type = "button";
  voteBar.append(needButton, noNeedButton);
  const banner = el(doc, "div", "banner");
  const bannerText = el(doc, "p", "banner-text");
  const retryButton = el(doc, "button", "retry", "Retry");
  retryButton.type = "button";
  banner.append(bannerText, retryButton);
  work.append(notice, itemText, voteBar, banner);

  const complete = el(doc, "section", "complete");
  const completeText = el(doc, "p", "complete-text");
  complete.append(completeText);

  const progress = el(doc, "aside", "progress");
  const progressTitle = doc.createElement("h2");
  progressTitle.textContent = "Progress";
  const itemsLine = el(doc, "p", "p-items");
  const mineLine = el(doc, "p", "p-mine");
  const elapsedLine = el(doc, "p", "p-elapsed");
  const refreshedLine = el(doc, "p", "p-refreshed");
  progress.append(progressTitle, itemsLine, mineLine, elapsedLine, refreshedLine);

  root.replaceChildren(title, signin, work, complete, progress);
  return {
    signin,
    handle,
    startButton,
    signinError,
    work,
    itemText,
    notice,
    needButton,
    noNeedButton,
    banner,
    bannerText,
    retryButton,
    complete,
    completeText,
    progress,
    itemsLine,
    mineLine,
    elapsedLine,
    refreshedLine,
  };
}

function formatClock(epochMs: number): string {
  const date = new Date(epochMs);
  const pad = (value: number) => String(value).padStart(2, "0");
  return `${pad(date.getHours())}:${pad(date.getMinutes())}:${pad(date.getSeconds())}`;
}

function formatElapsed(totalSeconds: number): string {
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

export function mount(root: HTMLElement, options: MountOptions = {}): MountedApp {
  const doc = root.ownerDocument;
  const api = options.api ?? new ApiClient("");
  const storage = options.storage ?? root.ownerDocument.defaultView?.localStorage;
  const pollIntervalMs = options.pollIntervalMs ?? 5000;
  const ui = buildUi(root);

  const session = new LabelSession(api, {
    now: options.now,
    onChange: (state) => render(state),
  });

  function render(state: SessionState): void {
    ui.signin.hidden = state.phase !== "signin";
    ui.signinError.textContent = state.signinError;

    const working =
      state.phase === "labeling" ||
      state.phase === "submitting" ||
      state.phase === "loading" ||
      state.phase === "offline" ||
      state.phase === "unreachable";
    ui.work.hidden = !working;
    ui.itemText.textContent = state.currentItem ? state.currentItem.text : "";
    ui.notice.textContent = state.notice;
    const canVote = state.phase === "labeling" && state.currentItem !== null;
    ui.needButton.disabled = !canVote;
    ui.noNeedButton.disabled = !canVote;

    const down = state.phase === "offline" || state.phase === "unreachable";
    ui.banner.hidden = !down;
    ui.bannerText.textContent = down ? state.notice : "";

    ui.complete.hidden = state.phase !== "complete";
    ui.completeText.textContent =
      state.phase === "complete"
        ? `Nothing left to label — you answered ${state.labeledCount} item(s). Thank you!`
        : "";

    ui.progress.classList.toggle("stale", state.progressStale);
    if (state.progress) {
      ui.itemsLine.textContent = `items complete: ${state.progress.completed} / ${state.progress.items_total}`;
    } else {
      ui.itemsLine.textContent = "items complete: –";
    }
    ui.mineLine.textContent = `your answers: ${state.personalShown}`;
    ui.elapsedLine.textContent = `session time: ${formatElapsed(session.elapsedSeconds())}`;
    if (state.lastProgressAt !== null) {
      const suffix = state.progressStale ? " (stale — refresh failed)" : "";
      ui.refreshedLine.textContent = `updated: ${formatClock(state.lastProgressAt)}${suffix}`;
    } else {
      ui.refreshedLine.textContent = state.progressStale
        ? "progress unavailable"
        : "updated: –";
    }
  }

  async function startFromInput(): Promise<void> {
    const started = await session.start(ui.handle.value);
    if (started && storage) {
      storage.setItem(STORAGE_KEY, session.state.labelerId);
    }
  }

  const onKeydown = (event: KeyboardEvent): void => {
    const target = event.target as HTMLElement | null;
    if (target) {
      const tag = target.tagName;
      if (tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT" || target.isContentEditable) {
        return;
      }
    }
    if (event.key === "j" || event.key === "J") {
      void session.vote(true);
    } else if (event.key === "k" || event.key === "K") {
      void session.vote(false);
    }
  };

  const onHandleKeydown = (event: KeyboardEvent): void => {
    if (event.key === "Enter") {
      void startFromInput();
    }
  };

  ui.startButton.addEventListener("click", () => void startFromInput());
  ui.needButton.addEventListener("click", () => void session.vote(true));
  ui.noNeedButton.addEventListener("click", () => void session.vote(false));
  ui.retryButton.addEventListener("click", () => void session.retry());
  ui.handle.addEventListener("keydown", onHandleKeydown);
  doc.addEventListener("keydown", onKeydown);

  const stored = storage?.getItem(STORAGE_KEY);
  if (stored) {
    ui.handle.value = stored;
  }

  const refresh = (): Promise<void> => session.refreshProgress();
  let timer: ReturnType<typeof setInterval> | null = null;
  if (pollIntervalMs > 0) {
    timer = setInterval(() => void refresh(), pollIntervalMs);
  }
  void refresh();
  render(session.state);

  return {
    session,
    refresh,
    stop(): void {
      if (timer !== null) {
        clearInterval(timer);
      }
      doc.removeEventListener("keydown", onKeydown);
    },
  };
}
