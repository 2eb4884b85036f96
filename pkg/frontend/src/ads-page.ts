import { HttpApiClient } from "./api.js";
import { replaceAds } from "./addemo.js";

const api = new HttpApiClient("");

async function run(): Promise<void> {
  const root = document.getElementById("page");
  const status = document.getElementById("status");
  if (!root || !status) return;
  const user = new URLSearchParams(location.search).get("user") ?? "addemo";
  try {
    const report = await replaceAds(api, user, root, "http://news.example/story");
    status.textContent =
      `${report.replaced.length} ad slot(s) replaced with study widgets, ` +
      `${report.untouched.length} element(s) untouched`;
  } catch (err) {
    status.className = "wf-error wf-banner";
    status.textContent = `service unreachable: ${err instanceof Error ? err.message : err}`;
  }
}

void run();
