/**
 * Live page capture: document HTML plus render-time geometry for every node
 * the engine will index. Real boxes make the engine's reading-order
 * pseudo-geometry unnecessary when a browser did the capture.
 */

import { SnapshotUpload } from "./api.js";
import { pathOf } from "./nodePath.js";

const EXCLUDED_TAGS = new Set(["script", "style", "template", "head"]);
const INTERACTIVE_TAGS = new Set(["a", "button", "input", "select", "textarea"]);
const INTERACTIVE_ROLES = new Set([
  "button", "link", "checkbox", "radio", "menuitem", "menuitemcheckbox",
  "menuitemradio", "option", "switch", "tab", "textbox", "searchbox",
  "combobox", "slider", "spinbutton",
]);

export interface Geometry {
  rect(el: Element): { x: number; y: number; w: number; h: number };
  visible(el: Element): boolean;
}

/** Geometry from the real rendering engine. */
export const domGeometry: Geometry = {
  rect(el: Element) {
    const r = el.getBoundingClientRect();
    return {
      x: r.left + window.scrollX,
      y: r.top + window.scrollY,
      w: r.width,
      h: r.height,
    };
  },
  visible(el: Element) {
    const style = window.getComputedStyle(el);
    if (style.display === "none" || style.visibility === "hidden") return false;
    const r = el.getBoundingClientRect();
    return r.width > 0 && r.height > 0;
  },
};

function directText(el: Element): string {
  let out = "";
  el.childNodes.forEach((node) => {
    if (node.nodeType === 3 /* TEXT_NODE */) out += node.textContent ?? "";
  });
  return out.split(/\s+/).filter(Boolean).join(" ");
}

function isInteractive(el: Element): boolean {
  const tag = el.tagName.toLowerCase();
  if (INTERACTIVE_TAGS.has(tag)) return true;
  const role = (el.getAttribute("role") ?? "").trim().toLowerCase();
  if (INTERACTIVE_ROLES.has(role)) return true;
  for (const attr of el.getAttributeNames()) {
    if (attr.startsWith("on")) return true;
  }
  return false;
}

/** True for nodes the engine's index will mark: visible and either
 * text-bearing or interactive. */
export function isIndexable(el: Element, geometry: Geometry): boolean {
  const tag = el.tagName.toLowerCase();
  if (EXCLUDED_TAGS.has(tag)) return false;
  if (!geometry.visible(el)) return false;
  return directText(el).length > 0 || isInteractive(el);
}

export function captureLayout(doc: Document, geometry: Geometry = domGeometry) {
  const entries: SnapshotUpload["layout"] = [];
  const walk = (el: Element) => {
    const tag = el.tagName.toLowerCase();
    if (EXCLUDED_TAGS.has(tag)) return;
    if (!geometry.visible(el)) return; // visibility inherits downward
    if (isIndexable(el, geometry)) {
      const rect = geometry.rect(el);
      entries.push({
        path: pathOf(el),
        x: rect.x,
        y: rect.y,
        w: rect.w,
        h: rect.h,
        visible: true,
      });
    }
    for (const child of Array.from(el.children)) walk(child);
  };
  for (const root of Array.from(doc.children)) walk(root);
  return entries;
}

export function capturePage(doc: Document,
                            geometry: Geometry = domGeometry): SnapshotUpload {
  const root = doc.documentElement;
  return {
    html: root ? root.outerHTML : "",
    url: doc.location?.href ?? "",
    title: doc.title ?? "",
    captured_at: new Date().toISOString().replace(/\.\d{3}Z$/, "Z"),
    layout: captureLayout(doc, geometry),
  };
}
