/** Ad-replacement demo: for every placeholder ad element on the page, ask
 * the service whether its source URL is an advertisement; replace matches
 * with a grid of study widgets sized by the layout endpoint. Non-matching
 * elements are left untouched. */

import { ApiClient, LayoutFit } from "./api.js";
import { QuizWidget } from "./widget.js";

export type ReplacementReport = {
  replaced: HTMLElement[];
  untouched: HTMLElement[];
  widgets: QuizWidget[];
};

/** Placeholder ad elements carry data-src (the URL an ad network would
 * load from) plus data-width/data-height for their slot size. */
export function adCandidates(root: HTMLElement): HTMLElement[] {
  return Array.from(root.querySelectorAll<HTMLElement>("[data-src]"));
}

function slotSize(el: HTMLElement): { width: number; height: number } {
  return {
    width: Number(el.dataset.width ?? el.getAttribute("width") ?? el.clientWidth) || 0,
    height: Number(el.dataset.height ?? el.getAttribute("height") ?? el.clientHeight) || 0,
  };
}

function buildGrid(
  doc: Document,
  api: ApiClient,
  user: string,
  fit: LayoutFit,
): { grid: HTMLElement; widgets: QuizWidget[] } {
  const grid = doc.createElement("div");
  grid.className = "wf-ad-grid";
  grid.style.display = "grid";
  grid.style.gridTemplateColumns = `repeat(${fit.columns}, ${fit.tile_width}px)`;
  grid.style.gap = "2px";
  const widgets: QuizWidget[] = [];
  for (let i = 0; i < fit.columns * fit.rows; i++) {
    const widget = new QuizWidget(
      api,
      user,
      { width: fit.tile_width, height: fit.tile_height, scale: fit.scale },
      doc,
    );
    widget.root.classList.add("wf-ad-tile");
    grid.appendChild(widget.root);
    widgets.push(widget);
  }
  return { grid, widgets };
}

/** Replace every blocked ad element under `root`. The page URL feeds the
 * first-party/third-party decision server-side. */
export async function replaceAds(
  api: ApiClient,
  user: string,
  root: HTMLElement,
  pageUrl: string,
): Promise<ReplacementReport> {
  const doc = root.ownerDocument;
  const report: ReplacementReport = { replaced: [], untouched: [], widgets: [] };
  for (const element of adCandidates(root)) {
    const src = element.dataset.src ?? "";
    let verdict = "no_match";
    try {
      verdict = (await api.match(src, pageUrl)).verdict;
    } catch {
      verdict = "no_match"; // unreachable service: leave the page alone
    }
    if (verdict !== "block") {
      report.untouched.push(element);
      continue;
    }
    const { width, height } = slotSize(element);
    const { fit } = await api.layout(width, height);
    if (!fit) {
      report.untouched.push(element);
      continue;
    }
    const { grid, widgets } = buildGrid(doc, api, user, fit);
    grid.dataset.replaces = src;
    element.replaceWith(grid);
    report.replaced.push(grid);
    report.widgets.push(...widgets);
  }
  await Promise.all(report.widgets.map((w) => w.start()));
  return report;
}
