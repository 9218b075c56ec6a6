import { beforeEach, describe, expect, it, vi } from "vitest";

import {
  BEACON_CLASS,
  HIGHLIGHT_CLASS,
  PULSE_CLASS,
  clearOverlays,
  collapseMap,
  highlightSpan,
  highlightWholeElement,
  scrollAndPulse,
} from "../src/overlay.js";
import { loadTestPage } from "./helpers.js";

describe("span highlights", () => {
  beforeEach(() => {
    loadTestPage();
  });

  it("wraps exactly the requested collapsed-text range", () => {
    const fact = document.getElementById("fact")!;
    const text = "The project is maintained by Ada Lovelace and a small team.";
    const start = text.indexOf("Ada Lovelace");
    highlightSpan(document, {
      element: fact, start, end: start + "Ada Lovelace".length,
      colorSlot: 0, key: "find-1",
    });
    const marks = fact.querySelectorAll(`.${HIGHLIGHT_CLASS}`);
    expect(marks.length).toBe(1);
    expect(marks[0].textContent).toBe("Ada Lovelace");
    expect(fact.textContent).toBe(text); // page text never changes
  });

  it("is fully reversible", () => {
    const fact = document.getElementById("fact")!;
    const before = fact.innerHTML;
    highlightSpan(document, {
      element: fact, start: 0, end: 11, colorSlot: 2, key: "find-1",
    });
    expect(fact.innerHTML).not.toBe(before);
    clearOverlays(document);
    expect(fact.innerHTML).toBe(before);
  });

  it("collapse map mirrors whitespace collapsing", () => {
    const el = document.createElement("p");
    el.appendChild(document.createTextNode("  a   b "));
    document.body.appendChild(el);
    const map = collapseMap(el);
    // collapsed text is "a b": offsets of 'a', the first run space, 'b'
    expect(map.length).toBe(3);
    expect(map[0].offset).toBe(2);
    expect(map[2].offset).toBe(6);
  });
});

describe("whole-element beacons and pulsing", () => {
  beforeEach(() => {
    loadTestPage();
  });

  it("draws a positioned beacon without touching the element", () => {
    const menu = document.getElementById("menu")!;
    const before = menu.outerHTML;
    highlightWholeElement(document, menu, 1, "guide-target");
    expect(menu.outerHTML).toBe(before);
    expect(document.querySelectorAll(`.${BEACON_CLASS}`).length).toBe(1);
    clearOverlays(document);
    expect(document.querySelectorAll(`.${BEACON_CLASS}`).length).toBe(0);
  });

  it("scrollAndPulse scrolls to the first keyed overlay and restarts the pulse", () => {
    const fact = document.getElementById("fact")!;
    highlightSpan(document, {
      element: fact, start: 0, end: 3, colorSlot: 0, key: "find-1",
    });
    const wrapper = document.querySelector(`.${HIGHLIGHT_CLASS}`) as HTMLElement;
    const scrolled = vi.fn();
    (wrapper as unknown as { scrollIntoView: unknown }).scrollIntoView = scrolled;
    const hit = scrollAndPulse(document, "find-1");
    expect(hit).toBe(wrapper);
    expect(scrolled).toHaveBeenCalledOnce();
    expect(wrapper.classList.contains(PULSE_CLASS)).toBe(true);
  });
});
