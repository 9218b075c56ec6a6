/**
 * Content script: the only code with page access. It captures the page for
 * upload, draws/clears overlays, and executes confirmed hide directives.
 * It never clicks, types, or navigates for the user.
 */

import { HideDirective } from "./api.js";
import { capturePage } from "./capture.js";
import { resolvePath } from "./nodePath.js";
import {
  clearOverlays,
  drawGuideBeacon,
  highlightSpan,
  highlightWholeElement,
  scrollAndPulse,
} from "./overlay.js";
import { AppliedHide, applyDirectives, undoHide } from "./hidePanel.js";

export interface HighlightItem {
  path: string;
  start: number | null;
  end: number | null;
  colorSlot: number;
  key: string;
}

export type ContentMessage =
  | { type: "capture" }
  | { type: "highlight"; items: HighlightItem[]; scrollKey: string | null }
  | { type: "scrollPulse"; key: string }
  | { type: "clearOverlays" }
  | { type: "guideTarget"; path: string | null; instruction: string }
  | { type: "applyHide"; directives: HideDirective[] }
  | { type: "undoHide"; applied: AppliedHide };

export function handleContentMessage(doc: Document,
                                     message: ContentMessage): unknown {
  switch (message.type) {
    case "capture":
      return capturePage(doc);
    case "highlight": {
      for (const item of message.items) {
        const el = resolvePath(doc, item.path);
        if (!el) continue;
        if (item.start !== null && item.end !== null) {
          highlightSpan(doc, {
            element: el, start: item.start, end: item.end,
            colorSlot: item.colorSlot, key: item.key,
          });
        } else {
          highlightWholeElement(doc, el, item.colorSlot, item.key);
        }
      }
      if (message.scrollKey) scrollAndPulse(doc, message.scrollKey);
      return { ok: true };
    }
    case "scrollPulse":
      scrollAndPulse(doc, message.key);
      return { ok: true };
    case "clearOverlays":
      clearOverlays(doc);
      return { ok: true };
    case "guideTarget": {
      clearOverlays(doc);
      if (message.path) {
        const el = resolvePath(doc, message.path);
        if (el) drawGuideBeacon(doc, el, message.instruction);
      }
      return { ok: true };
    }
    case "applyHide":
      return applyDirectives(doc, message.directives);
    case "undoHide":
      return { restored: undoHide(doc, message.applied) };
    default:
      return { error: "unknown message" };
  }
}

if (typeof chrome !== "undefined" && chrome.runtime?.onMessage) {
  chrome.runtime.onMessage.addListener((message, _sender, sendResponse) => {
    sendResponse(handleContentMessage(document, message as ContentMessage));
    return false;
  });
}
