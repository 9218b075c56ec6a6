/**
 * In-page highlights. Two kinds of page write happen here and both are
 * reversible: span highlights wrap matched text ranges in marker elements
 * (text content is never changed, and unwrapping restores the original
 * nodes), and whole-element beacons are positioned overlay divs that never
 * touch the target at all.
 *
 * Span offsets arrive from the engine and index into the element's
 * whitespace-collapsed direct text, so the map from collapsed offsets back
 * to concrete text nodes mirrors the engine's collapsing rule.
 */

export const PALETTE = [
  "#ffe066", "#a5d8ff", "#b2f2bb", "#ffc9c9",
  "#e599f7", "#ffd8a8", "#99e9f2", "#d8f5a2",
];

export const HIGHLIGHT_CLASS = "pageguide-highlight";
export const PULSE_CLASS = "pageguide-pulse";
export const BEACON_CLASS = "pageguide-beacon";
export const TOOLTIP_CLASS = "pageguide-tooltip";

const STYLE_ID = "pageguide-overlay-style";

export function ensureOverlayStyles(doc: Document): void {
  if (doc.getElementById(STYLE_ID)) return;
  const style = doc.createElement("style");
  style.id = STYLE_ID;
  style.textContent = `
.${HIGHLIGHT_CLASS} { border-radius: 2px; }
.${PULSE_CLASS} { animation: pageguide-pulse 1.2s ease-in-out 3; }
@keyframes pageguide-pulse {
  0%, 100% { filter: brightness(1); }
  50% { filter: brightness(1.35); }
}
.${BEACON_CLASS} {
  position: absolute; pointer-events: none; z-index: 2147483646;
  outline: 3px solid #4dabf7; border-radius: 6px;
  box-shadow: 0 0 0 4px rgba(77, 171, 247, 0.25);
}
.${TOOLTIP_CLASS} {
  position: absolute; z-index: 2147483647; max-width: 320px;
  background: #1f2430; color: #fff; padding: 6px 10px; border-radius: 6px;
  font-size: 12px; font-family: system-ui, sans-serif;
}`;
  (doc.head ?? doc.documentElement)?.appendChild(style);
}

interface CollapsedChar {
  node: Text;
  offset: number;
}

/** Map each character of the collapsed direct text to its source position.
 * Mirrors the engine: leading/trailing runs vanish, inner runs become one
 * space anchored at the run's first whitespace character. */
export function collapseMap(el: Element): CollapsedChar[] {
  const map: CollapsedChar[] = [];
  let pendingSpace: CollapsedChar | null = null;
  let emitted = false;
  el.childNodes.forEach((node) => {
    if (node.nodeType !== 3) return;
    const text = node as Text;
    const data = text.data;
    for (let i = 0; i < data.length; i += 1) {
      if (/\s/.test(data[i])) {
        if (emitted && pendingSpace === null) {
          pendingSpace = { node: text, offset: i };
        }
        continue;
      }
      if (pendingSpace !== null) {
        map.push(pendingSpace);
        pendingSpace = null;
      }
      map.push({ node: text, offset: i });
      emitted = true;
    }
  });
  return map;
}

function wrapTextRange(doc: Document, node: Text, start: number, end: number,
                       color: string, key: string): void {
  const target = node.splitText(start);
  target.splitText(end - start);
  const wrapper = doc.createElement("span");
  wrapper.className = `${HIGHLIGHT_CLASS} ${PULSE_CLASS}`;
  wrapper.dataset.pageguideKey = key;
  wrapper.style.backgroundColor = color;
  target.parentNode?.replaceChild(wrapper, target);
  wrapper.appendChild(target);
}

export interface SpanHighlight {
  element: Element;
  start: number;
  end: number;
  colorSlot: number;
  key: string;
}

/** Wrap the [start, end) range of the element's collapsed direct text. */
export function highlightSpan(doc: Document, spec: SpanHighlight): void {
  ensureOverlayStyles(doc);
  const map = collapseMap(spec.element);
  const slice = map.slice(spec.start, spec.end);
  if (slice.length === 0) return;
  // group contiguous characters per text node (a span may straddle child
  // elements of the target)
  const color = PALETTE[spec.colorSlot % PALETTE.length];
  let group: CollapsedChar[] = [slice[0]];
  const groups: CollapsedChar[][] = [group];
  for (let i = 1; i < slice.length; i += 1) {
    const prev = group[group.length - 1];
    const current = slice[i];
    if (current.node === prev.node && current.offset === prev.offset + 1) {
      group.push(current);
    } else {
      group = [current];
      groups.push(group);
    }
  }
  // wrap right-to-left so earlier offsets stay valid while nodes split
  for (const g of groups.reverse()) {
    wrapTextRange(doc, g[0].node, g[0].offset,
                  g[g.length - 1].offset + 1, color, spec.key);
  }
}

/** Whole-element highlight: a positioned beacon div, page untouched. */
export function highlightWholeElement(doc: Document, el: Element,
                                      colorSlot: number, key: string): void {
  ensureOverlayStyles(doc);
  const rect = el.getBoundingClientRect();
  const beacon = doc.createElement("div");
  beacon.className = `${BEACON_CLASS} ${PULSE_CLASS}`;
  beacon.dataset.pageguideKey = key;
  beacon.style.left = `${rect.left + (doc.defaultView?.scrollX ?? 0)}px`;
  beacon.style.top = `${rect.top + (doc.defaultView?.scrollY ?? 0)}px`;
  beacon.style.width = `${rect.width}px`;
  beacon.style.height = `${rect.height}px`;
  beacon.style.outlineColor = PALETTE[colorSlot % PALETTE.length];
  doc.body.appendChild(beacon);
}

export function scrollAndPulse(doc: Document, key: string): Element | null {
  let first: Element | null = null;
  doc.querySelectorAll(`[data-pageguide-key="${key}"]`).forEach((el) => {
    if (!first) first = el;
    // restart the pulse animation
    el.classList.remove(PULSE_CLASS);
    void (el as HTMLElement).offsetWidth;
    el.classList.add(PULSE_CLASS);
  });
  if (first) {
    const target = first as Element & { scrollIntoView?: (o?: object) => void };
    target.scrollIntoView?.({ block: "center", behavior: "smooth" });
  }
  return first;
}

/** Remove every overlay, unwrapping span highlights in place. */
export function clearOverlays(doc: Document): void {
  doc.querySelectorAll(`.${BEACON_CLASS}, .${TOOLTIP_CLASS}`)
    .forEach((el) => el.remove());
  doc.querySelectorAll(`.${HIGHLIGHT_CLASS}`).forEach((el) => {
    const parent = el.parentNode;
    if (!parent) return;
    while (el.firstChild) parent.insertBefore(el.firstChild, el);
    parent.removeChild(el);
  });
  doc.body?.normalize();
}

/** Guide beacon plus an instruction tooltip anchored under the target. */
export function drawGuideBeacon(doc: Document, el: Element,
                                instruction: string): void {
  ensureOverlayStyles(doc);
  highlightWholeElement(doc, el, 1, "guide-target");
  const rect = el.getBoundingClientRect();
  const tooltip = doc.createElement("div");
  tooltip.className = TOOLTIP_CLASS;
  tooltip.textContent = instruction;
  tooltip.style.left = `${rect.left + (doc.defaultView?.scrollX ?? 0)}px`;
  tooltip.style.top = `${rect.bottom + 8 + (doc.defaultView?.scrollY ?? 0)}px`;
  doc.body.appendChild(tooltip);
}
