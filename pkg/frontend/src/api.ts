/** Typed client for the study-service HTTP API (see docs/api.md). */

export type QuizOption = { word_id: string; text: string };

export type QuizItem = {
  type: "quiz";
  quiz_id: string;
  direction: "en_to_target" | "target_to_en";
  prompt_word: string;
  prompt_text: string;
  options: QuizOption[];
};

export type IntroItem = {
  type: "intro";
  word_id: string;
  romanized: string;
  gloss: string;
};

export type NextItem = QuizItem | IntroItem;

export type AnswerResult = {
  correct: boolean;
  next_action: "retry" | "advance";
  feedback: { word_id: string; meaning: string } | null;
};

export type FeedPlan = {
  feed_length: number;
  rate: number;
  condition: "in_feed_quiz" | "link";
  positions: number[];
  kinds: string[];
};

export type MatchResult = {
  verdict: "block" | "allow" | "no_match";
  rule: string | null;
};

export type LayoutFit = {
  unit: { name: string; width: number; height: number };
  columns: number;
  rows: number;
  scale: number;
  tile_width: number;
  tile_height: number;
};

export type Metrics = {
  quizzes_answered: number;
  study_sessions: number;
  distinct_study_days: number;
  days_visited: number;
  words_learned: number;
};

export type Condition = "in_feed_quiz" | "link";

export interface ApiClient {
  nextItem(user: string, condition?: Condition): Promise<NextItem>;
  postAnswer(user: string, quizId: string, chosenIndex: number): Promise<AnswerResult>;
  linkItem(user: string, condition?: Condition): Promise<{ url: string }>;
  linkClick(user: string): Promise<void>;
  plan(user: string, length: number, condition?: Condition): Promise<FeedPlan>;
  match(url: string, page: string): Promise<MatchResult>;
  layout(width: number, height: number): Promise<{ fit: LayoutFit | null }>;
  metrics(user: string): Promise<Metrics>;
}

async function getJson<T>(url: string): Promise<T> {
  const res = await fetch(url);
  if (!res.ok) {
    const body = await res.json().catch(() => ({ error: res.statusText }));
    throw new Error(`${res.status}: ${(body as { error?: string }).error ?? res.statusText}`);
  }
  return res.json() as Promise<T>;
}

async function postJson<T>(url: string, payload: unknown): Promise<T> {
  const res = await fetch(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!res.ok) {
    const body = await res.json().catch(() => ({ error: res.statusText }));
    throw new Error(`${res.status}: ${(body as { error?: string }).error ?? res.statusText}`);
  }
  return res.json() as Promise<T>;
}

export class HttpApiClient implements ApiClient {
  constructor(private base: string = "") {}

  private url(path: string, params: Record<string, string | number | undefined>): string {
    const query = Object.entries(params)
      .filter(([, v]) => v !== undefined)
      .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
      .join("&");
    return `${this.base}${path}${query ? "?" + query : ""}`;
  }

  nextItem(user: string, condition?: Condition): Promise<NextItem> {
    return getJson(this.url("/api/next-item", { user, condition }));
  }

  postAnswer(user: string, quizId: string, chosenIndex: number): Promise<AnswerResult> {
    return postJson(`${this.base}/api/answer`, { user, quiz_id: quizId, chosen_index: chosenIndex });
  }

  linkItem(user: string, condition?: Condition): Promise<{ url: string }> {
    return getJson(this.url("/api/link-item", { user, condition }));
  }

  async linkClick(user: string): Promise<void> {
    await postJson(`${this.base}/api/link-click`, { user });
  }

  plan(user: string, length: number, condition?: Condition): Promise<FeedPlan> {
    return getJson(this.url("/api/plan", { user, length, condition }));
  }

  match(url: string, page: string): Promise<MatchResult> {
    return getJson(this.url("/api/match", { url, page }));
  }

  layout(width: number, height: number): Promise<{ fit: LayoutFit | null }> {
    return getJson(this.url("/api/layout", { w: width, h: height }));
  }

  metrics(user: string): Promise<Metrics> {
    return getJson(this.url("/api/metrics", { user }));
  }
}
