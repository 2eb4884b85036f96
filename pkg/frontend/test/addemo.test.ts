import { describe, expect, it } from "vitest";

import { replaceAds } from "../src/addemo.js";
import { FakeApi } from "./fake-api.js";

function demoPage(): HTMLElement {
  const page = document.createElement("div");
  page.innerHTML = `
    <h2>Article</h2>
    <div id="banner" class="ad-box" data-src="http://ads.example.com/creative/728x90.png"
         data-width="728" data-height="90">leaderboard</div>
    <p>body text</p>
    <div id="box" class="ad-box" data-src="http://banner.adnetwork.example/serve?id=42"
         data-width="300" data-height="250">rectangle</div>
    <img id="photo" data-src="http://news.example/img/fern.jpg" data-width="300" data-height="200" alt="fern">
  `;
  document.body.appendChild(page);
  return page;
}

describe("ad replacement demo", () => {
  it("replaces matching slots with widget grids and leaves the rest", async () => {
    const api = new FakeApi(false);
    const page = demoPage();
    const report = await replaceAds(api, "addemo", page, "http://news.example/story");

    expect(report.replaced).toHaveLength(2);
    expect(report.untouched).toHaveLength(1);
    // the 728x90 slot becomes three small tiles
    const bannerGrid = page.querySelector<HTMLElement>(
      '[data-replaces="http://ads.example.com/creative/728x90.png"]',
    );
    expect(bannerGrid).toBeTruthy();
    expect(bannerGrid!.querySelectorAll(".wf-ad-tile")).toHaveLength(3);
    expect(page.querySelector("#banner")).toBeNull();
    // the 300x250 slot becomes a single regular widget
    const boxGrid = page.querySelector<HTMLElement>(
      '[data-replaces="http://banner.adnetwork.example/serve?id=42"]',
    );
    expect(boxGrid!.querySelectorAll(".wf-ad-tile")).toHaveLength(1);
    // the editorial image is untouched
    const photo = page.querySelector<HTMLElement>("#photo");
    expect(photo).toBeTruthy();
    expect(photo!.tagName).toBe("IMG");
    // every widget tile fired an impression fetch
    expect(api.nextItemCalls).toBe(4);
    expect(report.widgets).toHaveLength(4);
  });

  it("widgets inside ad tiles run the full answer loop", async () => {
    const api = new FakeApi(false);
    const page = demoPage();
    const report = await replaceAds(api, "addemo", page, "http://news.example/story");
    const widget = report.widgets[0];
    expect(widget.phase).toBe("awaiting_answer");
    const quiz = widget.current!;
    if (quiz.type === "quiz") {
      const correct = quiz.options.findIndex((o) => o.word_id === quiz.prompt_word);
      await widget.choose(correct);
      expect(widget.solvedCount).toBe(1);
    }
  });

  it("does not touch anything when the service is unreachable", async () => {
    const api = new FakeApi(false);
    api.match = async () => {
      throw new Error("connection refused");
    };
    const page = demoPage();
    const report = await replaceAds(api, "addemo", page, "http://news.example/story");
    expect(report.replaced).toHaveLength(0);
    expect(page.querySelector("#banner")).toBeTruthy();
    expect(page.querySelector("#box")).toBeTruthy();
  });
});
