/**
 * Hide review pop-up and the page-side mutation executor. Every row starts
 * checked; nothing is hidden until the human clicks Confirm; each hidden
 * element can be un-hidden from the undo list.
 */

import { HideDirective, HideProposal } from "./api.js";
import { resolvePath } from "./nodePath.js";

export const REVIEW_CLASS = "pg-hide-review";
export const ROW_CLASS = "pg-hide-row";
export const CONFIRM_CLASS = "pg-hide-confirm";
export const JUMP_CLASS = "pg-hide-jump";

export interface HideReviewHooks {
  onConfirm(confirmedIds: number[]): void;
  onJump(elementId: number): void;
}

export function renderHideReview(doc: Document, container: Element,
                                 proposal: HideProposal,
                                 hooks: HideReviewHooks): void {
  container.querySelectorAll(`.${REVIEW_CLASS}`).forEach((el) => el.remove());
  const root = doc.createElement("div");
  root.className = REVIEW_CLASS;

  const message = doc.createElement("p");
  message.className = "pg-hide-message";
  message.textContent = proposal.message;
  root.appendChild(message);

  if (proposal.candidates.length === 0) {
    container.appendChild(root);
    return;
  }

  const list = doc.createElement("div");
  for (const candidate of proposal.candidates) {
    const row = doc.createElement("label");
    row.className = ROW_CLASS;
    row.dataset.elementId = String(candidate.element_id);

    const checkbox = doc.createElement("input");
    checkbox.type = "checkbox";
    checkbox.checked = true; // every row checked by default
    checkbox.dataset.elementId = String(candidate.element_id);
    row.appendChild(checkbox);

    const badge = doc.createElement("span");
    badge.className = "pg-hide-badge";
    badge.textContent = String(candidate.rank);
    row.appendChild(badge);

    const reason = doc.createElement("span");
    reason.className = "pg-hide-reason";
    reason.style.color = "#7048e8";
    reason.textContent = candidate.reason;
    row.appendChild(reason);

    const snippet = doc.createElement("span");
    snippet.className = "pg-hide-snippet";
    snippet.textContent = candidate.snippet;
    row.appendChild(snippet);

    const jump = doc.createElement("button");
    jump.className = JUMP_CLASS;
    jump.textContent = "↘";
    jump.addEventListener("click", (event) => {
      event.preventDefault();
      hooks.onJump(candidate.element_id);
    });
    row.appendChild(jump);

    list.appendChild(row);
  }
  root.appendChild(list);

  const confirm = doc.createElement("button");
  confirm.className = CONFIRM_CLASS;
  confirm.textContent = "Confirm";
  confirm.addEventListener("click", () => {
    const checked: number[] = [];
    list.querySelectorAll("input[type=checkbox]").forEach((box) => {
      const input = box as HTMLInputElement;
      if (input.checked) checked.push(Number(input.dataset.elementId));
    });
    hooks.onConfirm(checked);
  });
  root.appendChild(confirm);
  container.appendChild(root);
}

export interface AppliedHide {
  directive: HideDirective;
  priorStyle: string | null;
}

/** Execute hide directives on the live page, recording prior inline styles
 * so individual elements can be restored. */
export function applyDirectives(doc: Document,
                                directives: HideDirective[]): AppliedHide[] {
  const applied: AppliedHide[] = [];
  for (const directive of directives) {
    const el = resolvePath(doc, directive.node_path);
    if (!el) continue;
    const prior = el.getAttribute("style");
    const base = prior && prior.trim()
      ? prior.replace(/[\s;]+$/, "") + ";"
      : "";
    el.setAttribute("style", `${base}${directive.set_style}`);
    applied.push({ directive, priorStyle: prior });
  }
  return applied;
}

/** Re-show one hidden element by restoring its recorded style attribute. */
export function undoHide(doc: Document, applied: AppliedHide): boolean {
  const el = resolvePath(doc, applied.directive.node_path);
  if (!el) return false;
  if (applied.priorStyle === null) {
    el.removeAttribute("style");
  } else {
    el.setAttribute("style", applied.priorStyle);
  }
  return true;
}
