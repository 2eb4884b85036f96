/** Self-contained quiz widget: fetches items from the service, runs the
 * answer/feedback/retry loop, and advances to a new word after a correct
 * answer. Embeddable anywhere (feed cards, ad-slot tiles); a future
 * browser-extension content script can host it unchanged.
 *
 * Phase machine:
 *   idle -> loading -> awaiting_answer -> showing_feedback (wrong, retry on
 *   the same quiz) | advancing (correct, then loading the next item).
 * showing_feedback is reachable only from a wrong answer, advancing only
 * from a correct one. At most one answer request is in flight per widget,
 * so a double-click posts a single answer event.
 */

import { ApiClient, NextItem, QuizItem } from "./api.js";

export type WidgetPhase =
  | "idle"
  | "loading"
  | "awaiting_answer"
  | "showing_feedback"
  | "advancing"
  | "error";

export type WidgetOptions = {
  /** CSS size of the widget card; tiles in ad grids set these. */
  width?: number;
  height?: number;
  scale?: number;
  /** Called after each solved quiz (session-visible counter hook). */
  onSolved?: (count: number) => void;
};

const DIRECTION_LABEL: Record<QuizItem["direction"], string> = {
  en_to_target: "Pick the word for",
  target_to_en: "Pick the meaning of",
};

export class QuizWidget {
  readonly root: HTMLElement;
  phase: WidgetPhase = "idle";
  current: NextItem | null = null;
  solvedCount = 0;

  private answerInFlight = false;
  private feedbackText = "";
  private errorText = "";

  constructor(
    private api: ApiClient,
    private user: string,
    private options: WidgetOptions = {},
    doc: Document = document,
  ) {
    this.root = doc.createElement("div");
    this.root.className = "wf-widget";
    if (options.width) this.root.style.width = `${options.width}px`;
    if (options.height) this.root.style.minHeight = `${options.height}px`;
    if (options.scale && options.scale !== 1) {
      this.root.style.fontSize = `${Math.round(options.scale * 100)}%`;
    }
    this.render();
  }

  /** Fetch and show the first item. Each fetched item is one impression. */
  async start(): Promise<void> {
    await this.loadNext();
  }

  private async loadNext(): Promise<void> {
    this.phase = "loading";
    this.feedbackText = "";
    this.render();
    try {
      this.current = await this.api.nextItem(this.user);
      this.phase = "awaiting_answer";
    } catch (err) {
      this.errorText = String(err instanceof Error ? err.message : err);
      this.phase = "error";
    }
    this.render();
  }

  /** Option click handler. Ignores clicks while a request is in flight or
   * outside the answerable phases, so one user click maps to at most one
   * posted answer event. */
  async choose(index: number): Promise<void> {
    if (this.answerInFlight) return;
    if (this.phase !== "awaiting_answer" && this.phase !== "showing_feedback") return;
    const item = this.current;
    if (!item || item.type !== "quiz") return;

    this.answerInFlight = true;
    try {
      const result = await this.api.postAnswer(this.user, item.quiz_id, index);
      if (result.correct) {
        this.phase = "advancing";
        this.solvedCount += 1;
        this.options.onSolved?.(this.solvedCount);
        this.render();
        await this.loadNext();
      } else {
        const meaning = result.feedback?.meaning ?? "?";
        const chosen = item.options[index]?.text ?? "that";
        this.feedbackText = `${chosen} means “${meaning}” — try again`;
        this.phase = "showing_feedback";
        this.render();
      }
    } catch (err) {
      this.errorText = String(err instanceof Error ? err.message : err);
      this.phase = "error";
      this.render();
    } finally {
      this.answerInFlight = false;
    }
  }

  /** Continue button on intro cards and error retry. */
  async advance(): Promise<void> {
    if (this.phase === "loading" || this.answerInFlight) return;
    await this.loadNext();
  }

  private render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";
    this.root.dataset.phase = this.phase;

    const add = (tag: string, className: string, text?: string): HTMLElement => {
      const el = doc.createElement(tag);
      el.className = className;
      if (text !== undefined) el.textContent = text;
      this.root.appendChild(el);
      return el;
    };

    if (this.phase === "idle" || this.phase === "loading") {
      add("div", "wf-note", "…");
      return;
    }
    if (this.phase === "error") {
      add("div", "wf-error", `service unreachable: ${this.errorText}`);
      const retry = add("button", "wf-retry", "retry");
      retry.addEventListener("click", () => void this.advance());
      return;
    }

    const item = this.current;
    if (!item) return;

    if (item.type === "intro") {
      add("div", "wf-kicker", "New word");
      add("div", "wf-intro-word", item.romanized);
      add("div", "wf-intro-gloss", item.gloss);
      const next = add("button", "wf-continue", "got it");
      next.addEventListener("click", () => void this.advance());
      return;
    }

    add("div", "wf-kicker", DIRECTION_LABEL[item.direction]);
    add("div", "wf-prompt", item.prompt_text);
    const list = add("div", "wf-options", undefined);
    item.options.forEach((option, index) => {
      const button = doc.createElement("button");
      button.className = "wf-option";
      button.textContent = option.text;
      button.dataset.index = String(index);
      button.addEventListener("click", () => void this.choose(index));
      list.appendChild(button);
    });
    if (this.phase === "showing_feedback") {
      add("div", "wf-feedback", this.feedbackText);
    }
    if (this.phase === "advancing") {
      add("div", "wf-correct", "correct!");
    }
    if (this.solvedCount > 0) {
      add("div", "wf-count", `${this.solvedCount} solved this session`);
    }
  }
}
