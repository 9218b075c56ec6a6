/**
 * Side-panel rendering of a grounded answer: anchor markers in the display
 * text become clickable references that scroll to and re-pulse their
 * highlighted evidence; external links render as plain hyperlinks.
 */

import { FindResponse } from "./api.js";

export const ANCHOR_CLASS = "pg-citation-anchor";
export const WARNING_MARK = "⚠";

const ANCHOR_RE = /⟦(\d+)⟧([\s\S]*?)⟦\/\1⟧/g;

export interface FindPanelHooks {
  /** k is the 1-based citation anchor number. */
  onAnchorClick(k: number): void;
}

export function renderFindAnswer(doc: Document, container: Element,
                                 answer: FindResponse,
                                 hooks: FindPanelHooks): void {
  container.textContent = "";
  const body = doc.createElement("div");
  body.className = "pg-find-answer";

  let cursor = 0;
  const text = answer.display_text;
  for (const match of text.matchAll(ANCHOR_RE)) {
    const at = match.index ?? 0;
    if (at > cursor) {
      body.appendChild(doc.createTextNode(text.slice(cursor, at)));
    }
    const k = Number(match[1]);
    const anchor = doc.createElement("button");
    anchor.className = ANCHOR_CLASS;
    anchor.dataset.k = String(k);
    const citation = answer.citations[k - 1];
    if (citation) anchor.dataset.elementId = String(citation.element_id);
    anchor.textContent = match[2];
    anchor.addEventListener("click", () => hooks.onAnchorClick(k));
    body.appendChild(anchor);
    cursor = at + match[0].length;
  }
  if (cursor < text.length) {
    body.appendChild(doc.createTextNode(text.slice(cursor)));
  }
  container.appendChild(body);

  if (answer.external_links.length > 0) {
    const list = doc.createElement("ul");
    list.className = "pg-external-links";
    for (const link of answer.external_links) {
      const item = doc.createElement("li");
      const a = doc.createElement("a");
      a.href = link.url;
      a.textContent = link.label;
      a.target = "_blank";
      a.rel = "noreferrer";
      item.appendChild(a);
      list.appendChild(item);
    }
    container.appendChild(list);
  }

  if (answer.not_on_page) {
    const note = doc.createElement("p");
    note.className = "pg-not-on-page";
    note.textContent = "Not found on this page; the answer above comes from general knowledge.";
    container.appendChild(note);
  }
}
