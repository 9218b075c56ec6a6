/**
 * The three end-to-end panel behaviors, driven on the bundled test page with
 * scripted engine responses: anchor click scrolls-and-pulses the cited span,
 * the guide loop completes only through explicit Next clicks, and the hide
 * review hides exactly the still-checked rows with per-element undo.
 */

import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  FindResponse,
  GuideConfirmResponse,
  GuideNextResponse,
  HideProposal,
} from "../src/api.js";
import { handleContentMessage } from "../src/content.js";
import { ANCHOR_CLASS, renderFindAnswer } from "../src/findPanel.js";
import {
  GuideApi,
  GuideLoopPage,
  GuideLoopView,
  NEXT_CLASS,
  STOP_CLASS,
  runGuideLoop,
} from "../src/guidePanel.js";
import {
  applyDirectives,
  renderHideReview,
  undoHide,
} from "../src/hidePanel.js";
import { HIGHLIGHT_CLASS } from "../src/overlay.js";
import { pathOf } from "../src/nodePath.js";
import { loadTestPage } from "./helpers.js";

function panelContainer(): Element {
  let container = document.getElementById("panel-root");
  if (!container) {
    container = document.createElement("div");
    container.id = "panel-root";
    document.body.appendChild(container);
  }
  return container;
}

describe("find: citation anchor click scrolls to and pulses the span", () => {
  beforeEach(() => loadTestPage());

  it("wires anchors to the page highlight", () => {
    const fact = document.getElementById("fact")!;
    const text = fact.textContent!;
    const start = text.indexOf("Ada Lovelace");
    const span = { start, end: start + "Ada Lovelace".length,
                   tier: "exact", score: 1.0 };
    const answer: FindResponse = {
      display_text: "The maintainer is ⟦1⟧Ada Lovelace⟦/1⟧.",
      highlight_plan: {
        entries: [{ element_id: 3, span, color_slot: 0 }],
        scroll_target: 3,
      },
      citations: [{ element_id: 3, phrase: "Ada Lovelace", answer_offset: 18,
                    span, color_slot: 0 }],
      unresolved: [],
      external_links: [],
      not_on_page: false,
    };

    // page side: draw the plan highlights (id 3 -> #fact via its path)
    handleContentMessage(document, {
      type: "highlight",
      items: [{ path: pathOf(fact), start: span.start, end: span.end,
                colorSlot: 0, key: "find-1" }],
      scrollKey: null,
    });
    const wrapper = document.querySelector(`.${HIGHLIGHT_CLASS}`) as HTMLElement;
    expect(wrapper.textContent).toBe("Ada Lovelace");
    const scrolled = vi.fn();
    (wrapper as unknown as { scrollIntoView: unknown }).scrollIntoView = scrolled;

    // panel side: render the answer and click the anchor
    const pulses: string[] = [];
    renderFindAnswer(document, panelContainer(), answer, {
      onAnchorClick: (k) => {
        pulses.push(`find-${k}`);
        handleContentMessage(document, { type: "scrollPulse", key: `find-${k}` });
      },
    });
    const anchor = document.querySelector(`.${ANCHOR_CLASS}`) as HTMLButtonElement;
    expect(anchor.textContent).toBe("Ada Lovelace");
    expect(anchor.dataset.elementId).toBe("3");

    anchor.click();
    expect(pulses).toEqual(["find-1"]);
    expect(scrolled).toHaveBeenCalledOnce();
  });
});

describe("guide: loop reaches Completed only via explicit Next clicks", () => {
  beforeEach(() => loadTestPage());

  function scriptedEngine(): GuideApi & { confirms: number; stops: number } {
    const menuPath = pathOf(document.getElementById("menu")!);
    const savePath = pathOf(document.getElementById("save")!);
    void menuPath;
    void savePath;
    const steps: GuideNextResponse[] = [
      {
        state: "AwaitingUser",
        step: { step: 1, instruction: "Click Open menu",
                highlight: { element_id: 7, text: "Open menu" },
                wait_for: "click", is_last: false, next_hint: "A menu appears" },
        card: { step_no: 1, instruction: "Click Open menu",
                hint: "A menu appears",
                highlight: { element_id: 7, text: "Open menu" },
                wait_for: "click", controls: ["Next", "Stop"] },
      },
      {
        state: "AwaitingUser",
        step: { step: 2, instruction: "Click Save draft",
                highlight: { element_id: 8, text: "Save draft" },
                wait_for: "click", is_last: true, next_hint: "" },
        card: { step_no: 2, instruction: "Click Save draft", hint: "",
                highlight: { element_id: 8, text: "Save draft" },
                wait_for: "click", controls: ["Finish", "Stop"] },
      },
    ];
    const confirms: GuideConfirmResponse[] = [
      { state: "AwaitingStep",
        divergence: { expected_element: { element_id: 7, text: "Open menu" },
                      found_in_new_index: false, url_changed: true,
                      verdict: "consistent" } },
      { state: "Completed",
        divergence: { expected_element: { element_id: 8, text: "Save draft" },
                      found_in_new_index: true, url_changed: false,
                      verdict: "consistent" } },
    ];
    return {
      confirms: 0,
      stops: 0,
      async guideNext() {
        return steps.shift()!;
      },
      async guideConfirm() {
        this.confirms += 1;
        return confirms.shift()!;
      },
      async guideStop() {
        this.stops += 1;
        return { state: "Stopped" };
      },
    };
  }

  function pageDouble(): GuideLoopPage & { targets: (number | null)[] } {
    return {
      targets: [],
      showTarget(elementId) {
        this.targets.push(elementId);
      },
      clearTarget() {},
      recapture: async () => "snap-fresh",
    };
  }

  it("completes after two Next clicks and never auto-advances", async () => {
    const engine = scriptedEngine();
    const page = pageDouble();
    const container = panelContainer();
    const view: GuideLoopView = {
      showCard: (card, hooks) => {
        renderStepCard(document, container, card, hooks);
      },
      showNotice: () => {},
    };
    const { renderStepCard } = await import("../src/guidePanel.js");

    const done = runGuideLoop(engine, "session-1", page, view);

    // staged but untouched: no confirm may have happened yet
    await new Promise((resolve) => setTimeout(resolve, 10));
    expect(engine.confirms).toBe(0);
    expect(page.targets).toEqual([7]);

    (container.querySelector(`.${NEXT_CLASS}`) as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 10));
    expect(engine.confirms).toBe(1);

    (container.querySelector(`.${NEXT_CLASS}`) as HTMLButtonElement).click();
    const finalState = await done;
    expect(finalState).toBe("Completed");
    expect(engine.confirms).toBe(2);
    expect(engine.stops).toBe(0);
  });

  it("stop ends the session without confirming the staged step", async () => {
    const engine = scriptedEngine();
    const page = pageDouble();
    const container = panelContainer();
    const { renderStepCard } = await import("../src/guidePanel.js");
    const view: GuideLoopView = {
      showCard: (card, hooks) => renderStepCard(document, container, card, hooks),
      showNotice: () => {},
    };
    const done = runGuideLoop(engine, "session-2", page, view);
    await new Promise((resolve) => setTimeout(resolve, 10));
    (container.querySelector(`.${STOP_CLASS}`) as HTMLButtonElement).click();
    expect(await done).toBe("Stopped");
    expect(engine.confirms).toBe(0);
    expect(engine.stops).toBe(1);
  });
});

describe("hide: review checklist, selective hiding, and undo", () => {
  beforeEach(() => loadTestPage());

  function proposal(): HideProposal {
    return {
      proposal_ref: "hp-1",
      message: "Found 3 candidates",
      source_index_ref: "sha256:x",
      candidates: [
        { rank: 1, element_id: 10, reason: "sponsored content",
          snippet: "Sponsored: premium keyboards", checked: true },
        { rank: 2, element_id: 11, reason: "promoted content",
          snippet: "Promoted: cloud credits", checked: true },
        { rank: 3, element_id: 12, reason: "cookie notice",
          snippet: "We use cookies", checked: true },
      ],
    };
  }

  it("unchecking one row hides exactly the remaining rows; undo restores", () => {
    const ads = Array.from(document.querySelectorAll("div.ad p"));
    const bannerText = document.querySelector("div.banner p")!;
    const pathById = new Map<number, string>([
      [10, pathOf(ads[0])],
      [11, pathOf(ads[1])],
      [12, pathOf(bannerText)],
    ]);

    let confirmed: number[] | null = null;
    renderHideReview(document, panelContainer(), proposal(), {
      onJump: () => {},
      onConfirm: (ids) => {
        confirmed = ids;
      },
    });

    const boxes = document.querySelectorAll(
      "#panel-root input[type=checkbox]") as NodeListOf<HTMLInputElement>;
    expect(boxes.length).toBe(3);
    expect(Array.from(boxes).every((b) => b.checked)).toBe(true);

    boxes[1].checked = false; // user unchecks the second row
    (document.querySelector(".pg-hide-confirm") as HTMLButtonElement).click();
    expect(confirmed).toEqual([10, 12]);

    // engine-side apply would return directives for the confirmed ids only
    const directives = confirmed!.map((id) => ({
      node_path: pathById.get(id)!, set_style: "display:none",
    }));
    const applied = applyDirectives(document, directives);
    expect(applied.length).toBe(2);

    const hidden = (el: Element) =>
      (el.getAttribute("style") ?? "").includes("display:none");
    expect(hidden(ads[0])).toBe(true);
    expect(hidden(ads[1])).toBe(false); // unchecked row left visible
    expect(hidden(bannerText)).toBe(true);

    // per-element undo re-shows the node exactly as it was
    expect(undoHide(document, applied[0])).toBe(true);
    expect(hidden(ads[0])).toBe(false);
    expect(ads[0].getAttribute("style")).toBeNull();
    expect(hidden(bannerText)).toBe(true); // the other stays hidden
  });

  it("empty proposal renders the message and no rows", () => {
    renderHideReview(document, panelContainer(), {
      proposal_ref: "hp-0", message: "No matching content found",
      source_index_ref: "sha256:x", candidates: [],
    }, { onJump: () => {}, onConfirm: () => {} });
    expect(document.querySelector(".pg-hide-message")!.textContent)
      .toBe("No matching content found");
    expect(document.querySelectorAll(".pg-hide-row").length).toBe(0);
  });

  it("preserves a prior inline style through hide and undo", () => {
    const intro = document.getElementById("intro")!;
    intro.setAttribute("style", "color: rgb(20, 20, 20);");
    const applied = applyDirectives(document, [
      { node_path: pathOf(intro), set_style: "display:none" },
    ]);
    expect(intro.getAttribute("style"))
      .toBe("color: rgb(20, 20, 20);display:none");
    undoHide(document, applied[0]);
    expect(intro.getAttribute("style")).toBe("color: rgb(20, 20, 20);");
  });
});
