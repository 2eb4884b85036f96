/** Synthetic social-feed page: placeholder posts with study items inserted
 * at the service's planned positions (one per `rate` organic posts). In the
 * in-feed condition each insertion hosts a live quiz widget; in the link
 * condition it is a card linking out to the quiz site. */

import { ApiClient, Condition, FeedPlan } from "./api.js";
import { QuizWidget } from "./widget.js";

const POST_BLURBS = [
  "had the best ramen today 🍜",
  "does anyone want two concert tickets for friday?",
  "finally finished the marathon!!",
  "look at this cloud, it's shaped like a cat",
  "new blog post is up, link in bio",
  "throwback to last summer",
  "my sourdough starter has a name now",
  "petition to make monday illegal",
];

export type RenderedFeed = {
  plan: FeedPlan;
  widgets: QuizWidget[];
  /** DOM index (among the container's children) of each inserted item. */
  insertedAt: number[];
};

function organicPost(doc: Document, index: number): HTMLElement {
  const post = doc.createElement("article");
  post.className = "feed-post";
  const author = doc.createElement("div");
  author.className = "feed-author";
  author.textContent = `friend ${((index * 7) % 23) + 1}`;
  const body = doc.createElement("div");
  body.className = "feed-body";
  body.textContent = `#${index + 1} ${POST_BLURBS[index % POST_BLURBS.length]}`;
  post.append(author, body);
  return post;
}

function linkCard(doc: Document, api: ApiClient, user: string): HTMLElement {
  const card = doc.createElement("aside");
  card.className = "feed-item link-card";
  const pitch = doc.createElement("div");
  pitch.className = "wf-kicker";
  pitch.textContent = "Learn Japanese in 5 minutes a day";
  const anchor = doc.createElement("a");
  anchor.className = "wf-link";
  anchor.textContent = "Take today's quiz →";
  anchor.href = "#";
  anchor.addEventListener("click", (event) => {
    event.preventDefault();
    void api
      .linkClick(user)
      .then(() => api.linkItem(user))
      .then(({ url }) => {
        anchor.href = url;
        card.appendChild(doc.createTextNode(" (opens the quiz site)"));
      })
      .catch(() => undefined);
  });
  card.append(pitch, anchor);
  return card;
}

/** Build the feed. Inserted items go before the organic post at each plan
 * position, so a widget planned at 10 has exactly ten organic posts above
 * it. Widgets fire their first impression immediately via next-item. */
export async function renderFeed(
  api: ApiClient,
  user: string,
  organicCount: number,
  container: HTMLElement,
  condition: Condition = "in_feed_quiz",
): Promise<RenderedFeed> {
  const doc = container.ownerDocument;
  const plan = await api.plan(user, organicCount, condition);
  container.textContent = "";

  const widgets: QuizWidget[] = [];
  const insertedAt: number[] = [];
  const pending = new Set(plan.positions);

  for (let i = 0; i <= organicCount; i++) {
    if (pending.has(i)) {
      pending.delete(i);
      insertedAt.push(container.children.length);
      if (plan.condition === "link") {
        container.appendChild(linkCard(doc, api, user));
      } else {
        const widget = new QuizWidget(api, user, {}, doc);
        widget.root.classList.add("feed-item");
        container.appendChild(widget.root);
        widgets.push(widget);
      }
    }
    if (i < organicCount) {
      container.appendChild(organicPost(doc, i));
    }
  }
  await Promise.all(widgets.map((w) => w.start()));
  return { plan, widgets, insertedAt };
}
