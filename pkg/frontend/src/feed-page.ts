import { Condition, HttpApiClient } from "./api.js";
import { renderFeed } from "./feed.js";

const api = new HttpApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

async function rerender(): Promise<void> {
  const user = el<HTMLInputElement>("user").value.trim() || "demo";
  const condition = el<HTMLSelectElement>("condition").value as Condition;
  const count = Math.max(0, Number(el<HTMLInputElement>("organic").value) || 25);
  const container = el<HTMLDivElement>("feed");
  const status = el<HTMLDivElement>("status");
  status.textContent = "rendering…";
  try {
    const { plan } = await renderFeed(api, user, count, container, condition);
    status.textContent = `${count} posts, items at ${plan.positions.join(", ") || "—"}`;
    void refreshMetrics(user);
  } catch (err) {
    status.textContent = "";
    const banner = document.createElement("div");
    banner.className = "wf-error wf-banner";
    banner.textContent = `service unreachable: ${err instanceof Error ? err.message : err}`;
    container.textContent = "";
    container.appendChild(banner);
  }
}

async function refreshMetrics(user: string): Promise<void> {
  try {
    const m = await api.metrics(user);
    el<HTMLDivElement>("metrics").textContent =
      `answered ${m.quizzes_answered} · sessions ${m.study_sessions} · ` +
      `study days ${m.distinct_study_days} · words learned ${m.words_learned}`;
  } catch {
    /* metrics are cosmetic here */
  }
}

el<HTMLButtonElement>("render").addEventListener("click", () => void rerender());
void rerender();
