/** Client-side labeling session: one labeler, one item at a time.
 *
 * Rules enforced here rather than in the DOM layer:
 *  - at most one vote request in flight (double-click protection);
 *  - no item is ever submitted twice from this client;
 *  - a vote that failed at the network level is kept locally and
 *    retried before anything else is fetched;
 *  - a 409 (the item was finished elsewhere) skips forward without
 *    counting;
 *  - all labeling decisions stay on the server — this class only
 *    relays answers and renders what it is told.
 */
import { ApiError, NetworkError } from "./api";
import type { Item, NextResult, ProgressSnapshot, VoteReceipt } from "./api";

export interface SessionApi {
  nextItem(labeler: string): Promise<NextResult>;
  submitVote(itemId: string, labeler: string, hasNeed: boolean): Promise<VoteReceipt>;
  progress(): Promise<ProgressSnapshot>;
}

export type Phase =
  | "signin" // collecting the handle
  | "loading" // fetching the next item
  | "labeling" // item on screen, awaiting a decision
  | "submitting" // vote request in flight
  | "offline" // a vote is queued locally, service unreachable
  | "unreachable" // a fetch failed; nothing queued
  | "complete"; // nothing left for this labeler

export interface PendingVote {
  itemId: string;
  hasNeed: boolean;
}

export interface SessionState {
  phase: Phase;
  labelerId: string;
  currentItem: Item | null;
  labeledCount: number;
  sessionStartedAt: number | null;
  progress: ProgressSnapshot | null;
  progressStale: boolean;
  lastProgressAt: number | null;
  /** Personal tally as displayed: never decreases, even when a stale
   * progress poll reports fewer votes than were submitted. */
  personalShown: number;
  pendingVote: PendingVote | null;
  notice: string;
  signinError: string;
}

export interface SessionOptions {
  now?: () => number;
  onChange?: (state: SessionState) => void;
}

export class LabelSession {
  private readonly api: SessionApi;
  private readonly now: () => number;
  private readonly onChange: (state: SessionState) => void;
  private readonly voted = new Set<string>();
  private inFlight = false;

  readonly state: SessionState = {
    phase: "signin",
    labelerId: "",
    currentItem: null,
    labeledCount: 0,
    sessionStartedAt: null,
    progress: null,
    progressStale: false,
    lastProgressAt: null,
    personalShown: 0,
    pendingVote: null,
    notice: "",
    signinError: "",
  };

  constructor(api: SessionApi, options: SessionOptions = {}) {
    this.api = api;
    this.now = options.now ?? (() => Date.now());
    this.onChange = options.onChange ?? (() => {});
  }

  private emit(): void {
    this.onChange(this.state);
  }

  /** Begin a session. An empty handle is rejected inline — no request
   * leaves the client. Returns whether the session started. */
  async start(labelerId: string): Promise<boolean> {
    if (this.state.phase !== "signin") {
      return false;
    }
    const trimmed = labelerId.trim();
    if (!trimmed) {
      this.state.signinError = "Enter a handle to start labeling.";
      this.emit();
      return false;
    }
    this.state.signinError = "";
    this.state.labelerId = trimmed;
    this.state.sessionStartedAt = this.now();
    await this.fetchNext();
    return true;
  }

  /** Submit a decision for the current item. Returns false when the
   * call was ignored (nothing on screen, or a vote already in
   * flight). A network failure queues the vote and still counts as
   * accepted. */
  async vote(hasNeed: boolean): Promise<boolean> {
    if (this.inFlight || this.state.phase !== "labeling") {
      return false;
    }
    const item = this.state.currentItem;
    if (item === null) {
      return false;
    }
    if (this.voted.has(item.item_id)) {
      // Defensive: the service never hands back an item this labeler
      // answered, but nothing may be submitted twice regardless.
      this.state.notice = "Item was already answered here; moving on.";
      this.state.currentItem = null;
      await this.fetchNext();
      return false;
    }
    this.inFlight = true;
    this.state.phase = "submitting";
    this.emit();
    let advance = false;
    try {
      await this.api.submitVote(item.item_id, this.state.labelerId, hasNeed);
      this.voted.add(item.item_id);
      this.state.labeledCount += 1;
      this.state.personalShown = Math.max(this.state.personalShown, this.state.labeledCount);
      this.state.notice = "";
      advance = true;
    } catch (err) {
      if (err instanceof NetworkError) {
        this.state.pendingVote = { itemId: item.item_id, hasNeed };
        this.state.phase = "offline";
        this.state.notice = "Connection lost — your answer is saved and will be retried.";
      } else if (err instanceof ApiError && err.status === 409) {
        this.voted.add(item.item_id);
        this.state.notice = "Item was completed by others — skipped.";
        advance = true;
      } else if (err instanceof ApiError) {
        this.voted.add(item.item_id);
        this.state.notice = `Vote rejected (${err.message}) — skipped.`;
        advance = true;
      } else {
        this.inFlight = false;
        throw err;
      }
    }
    this.inFlight = false;
    if (advance) {
      this.state.currentItem = null;
      await this.fetchNext();
    } else {
      this.emit();
    }
    return advance || this.state.pendingVote !== null;
  }

  /** Manual retry from the offline/unreachable banner. */
  async retry(): Promise<void> {
    if (this.inFlight) {
      return;
    }
    if (this.state.phase !== "offline" && this.state.phase !== "unreachable") {
      return;
    }
    this.inFlight = true;
    try {
      await this.fetchNext();
    } finally {
      this.inFlight = false;
    }
  }

  /** Poll the shared progress endpoint. A failed poll keeps the last
   * snapshot and marks it stale; the personal tally never decreases. */
  async refreshProgress(): Promise<void> {
    try {
      const snapshot = await this.api.progress();
      this.state.progress = snapshot;
      this.state.progressStale = false;
      this.state.lastProgressAt = this.now();
      const mine = this.state.labelerId
        ? (snapshot.per_labeler[this.state.labelerId] ?? 0)
        : 0;
      this.state.personalShown = Math.max(
        this.state.personalShown,
        mine,
        this.state.labeledCount,
      );
    } catch {
      this.state.progressStale = true;
    }
    this.emit();
  }

  elapsedSeconds(): number {
    if (this.state.sessionStartedAt === null) {
      return 0;
    }
    return Math.max(0, Math.floor((this.now() - this.state.sessionStartedAt) / 1000));
  }

  /** A queued vote is flushed before anything else is fetched. */
  private async fetchNext(): Promise<void> {
    if (this.state.pendingVote !== null) {
      const flushed = await this.flushPending();
      if (!flushed) {
        return; // still offline — keep the vote, fetch nothing
      }
    }
    this.state.phase = "loading";
    this.state.currentItem = null;
    this.emit();
    try {
      const next = await this.api.nextItem(this.state.labelerId);
      if (next.kind === "done") {
        this.state.phase = "complete";
      } else {
        this.state.currentItem = next.item;
        this.state.phase = "labeling";
      }
    } catch (err) {
      if (err instanceof NetworkError) {
        this.state.phase = "unreachable";
        this.state.notice = "Labeling service unreachable.";
      } else if (err instanceof ApiError) {
        this.state.phase = "unreachable";
        this.state.notice = `Could not fetch an item (${err.message}).`;
      } else {
        throw err;
      }
    }
    this.emit();
  }

  private async flushPending(): Promise<boolean> {
    const pending = this.state.pendingVote;
    if (pending === null) {
      return true;
    }
    try {
      await this.api.submitVote(pending.itemId, this.state.labelerId, pending.hasNeed);
      this.voted.add(pending.itemId);
      this.state.labeledCount += 1;
      this.state.personalShown = Math.max(this.state.personalShown, this.state.labeledCount);
      this.state.notice = "";
    } catch (err) {
      if (err instanceof NetworkError) {
        this.state.phase = "offline";
        this.state.notice = "Still offline — your answer is kept.";
        this.emit();
        return false;
      }
      if (err instanceof ApiError && err.status === 409) {
        this.voted.add(pending.itemId);
        this.state.notice = "Item was completed by others — skipped.";
      } else if (err instanceof ApiError) {
        this.voted.add(pending.itemId);
        this.state.notice = `Vote rejected (${err.message}) — skipped.`;
      } else {
        throw err;
      }
    }
    this.state.pendingVote = null;
    this.state.currentItem = null;
    return true;
  }
}
