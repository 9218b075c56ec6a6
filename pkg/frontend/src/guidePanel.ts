/**
 * Step card rendering and the guide loop driver. Exactly one card is active
 * at a time, and the session only ever advances from an explicit Next click:
 * the loop performs no clicks or typing on the user's behalf.
 */

import { GuideConfirmResponse, GuideNextResponse, StepCard } from "./api.js";

/** The slice of the engine client the loop needs (easy to stub in tests). */
export interface GuideApi {
  guideNext(sessionId: string): Promise<GuideNextResponse>;
  guideConfirm(sessionId: string, snapshotId?: string): Promise<GuideConfirmResponse>;
  guideStop(sessionId: string): Promise<{ state: string }>;
}

export const CARD_CLASS = "pg-step-card";
export const NEXT_CLASS = "pg-step-next";
export const STOP_CLASS = "pg-step-stop";

export interface StepCardHooks {
  onNext(): void;
  onStop(): void;
}

export function renderStepCard(doc: Document, container: Element,
                               card: StepCard, hooks: StepCardHooks): void {
  container.querySelectorAll(`.${CARD_CLASS}`).forEach((el) => el.remove());

  const root = doc.createElement("div");
  root.className = CARD_CLASS;

  const heading = doc.createElement("p");
  heading.className = "pg-step-instruction";
  heading.textContent = `Step ${card.step_no}: ${card.instruction}`;
  root.appendChild(heading);

  if (card.hint) {
    const hint = doc.createElement("p");
    hint.className = "pg-step-hint";
    hint.textContent = `💡 ${card.hint}`;
    root.appendChild(hint);
  }

  const controls = doc.createElement("div");
  controls.className = "pg-step-controls";
  const nextButton = doc.createElement("button");
  nextButton.className = NEXT_CLASS;
  nextButton.textContent = card.controls[0] ?? "Next";
  nextButton.addEventListener("click", hooks.onNext);
  const stopButton = doc.createElement("button");
  stopButton.className = STOP_CLASS;
  stopButton.textContent = "Stop";
  stopButton.addEventListener("click", hooks.onStop);
  controls.appendChild(nextButton);
  controls.appendChild(stopButton);
  root.appendChild(controls);

  container.appendChild(root);
}

export interface GuideLoopPage {
  /** Draw the beacon/tooltip for the staged step's target. */
  showTarget(elementId: number | null, instruction: string): void;
  /** Clear guide overlays (step confirmed, stopped, or session over). */
  clearTarget(): void;
  /** Re-capture and upload the current page; resolves to the snapshot id. */
  recapture(): Promise<string>;
}

export interface GuideLoopView {
  showCard(card: StepCard, hooks: StepCardHooks): void;
  showNotice(kind: "divergence" | "done" | "stopped", message: string): void;
}

/**
 * Drive one guide session against the engine. Resolves with the terminal
 * session state. Every advance waits for the human Next click delivered
 * through the card hooks.
 */
export async function runGuideLoop(client: GuideApi, sessionId: string,
                                   page: GuideLoopPage,
                                   view: GuideLoopView): Promise<string> {
  for (;;) {
    const staged = await client.guideNext(sessionId);
    const card = staged.card;
    page.showTarget(card.highlight ? card.highlight.element_id : null,
                    card.instruction);

    const action = await new Promise<"next" | "stop">((resolve) => {
      view.showCard(card, {
        onNext: () => resolve("next"),
        onStop: () => resolve("stop"),
      });
    });
    page.clearTarget();

    if (action === "stop") {
      const stopped = await client.guideStop(sessionId);
      view.showNotice("stopped", "Session stopped; completed steps stay in place.");
      return stopped.state;
    }

    // the user performed the action themselves; capture the outcome page
    const freshId = staged.step.is_last ? undefined : await page.recapture();
    const confirmed = await client.guideConfirm(sessionId, freshId);
    if (confirmed.state === "Completed") {
      view.showNotice("done", "All steps completed.");
      return confirmed.state;
    }
    if (confirmed.divergence.verdict === "diverged") {
      view.showNotice("divergence",
                      "The page did not change as expected; replanning from the current state.");
    }
  }
}
