/**
 * Side panel wiring: reads the service handshake from extension options,
 * routes each query through the engine, and drives the find/guide/hide
 * flows against the active tab's content script.
 */

import { EngineClient, FindResponse, Handshake } from "./api.js";
import { ContentMessage } from "./content.js";
import { renderFindAnswer } from "./findPanel.js";
import { GuideLoopPage, GuideLoopView, renderStepCard, runGuideLoop } from "./guidePanel.js";
import { renderHideReview } from "./hidePanel.js";

async function activeTabId(): Promise<number> {
  const tabs = await chrome.tabs.query({ active: true, currentWindow: true });
  const id = tabs[0]?.id;
  if (id === undefined) throw new Error("no active tab");
  return id;
}

async function sendToPage(message: ContentMessage): Promise<unknown> {
  return chrome.tabs.sendMessage(await activeTabId(), message);
}

async function loadHandshake(): Promise<Handshake> {
  const stored = await chrome.storage.local.get(["port", "secret"]);
  const port = Number(stored.port ?? 8787);
  const secret = String(stored.secret ?? "");
  if (!secret) {
    throw new Error("configure the service handshake (port + secret) in options");
  }
  return { port, secret };
}

function statusLine(text: string): void {
  const el = document.getElementById("pg-status");
  if (el) el.textContent = text;
}

export async function captureAndUpload(client: EngineClient): Promise<string> {
  const payload = await sendToPage({ type: "capture" });
  const { snapshot_id } = await client.uploadSnapshot(
    payload as Parameters<EngineClient["uploadSnapshot"]>[0]);
  return snapshot_id;
}

async function getIndexPaths(client: EngineClient,
                             snapshotId: string): Promise<Map<number, string>> {
  const { elements } = await client.getIndex(snapshotId);
  return new Map(elements.map((el) => [el.id, el.node_path]));
}

async function runFind(client: EngineClient, snapshotId: string, query: string,
                       pathsById: Map<number, string>): Promise<void> {
  const answer: FindResponse = await client.find(snapshotId, query);
  const container = document.getElementById("pg-answer");
  if (!container) return;

  const items = answer.highlight_plan.entries.flatMap((entry, i) => {
    const path = pathsById.get(entry.element_id);
    if (!path) return [];
    return [{
      path,
      start: entry.span ? entry.span.start : null,
      end: entry.span ? entry.span.end : null,
      colorSlot: entry.color_slot,
      key: `find-${i + 1}`,
    }];
  });
  const scrollKey = items.length > 0 ? items[0].key : null;
  await sendToPage({ type: "highlight", items, scrollKey });

  renderFindAnswer(document, container, answer, {
    onAnchorClick: (k) => {
      const citation = answer.citations[k - 1];
      if (!citation) return;
      const entryIndex = answer.highlight_plan.entries.findIndex(
        (entry) => entry.element_id === citation.element_id
          && JSON.stringify(entry.span) === JSON.stringify(citation.span));
      if (entryIndex >= 0) {
        void sendToPage({ type: "scrollPulse", key: `find-${entryIndex + 1}` });
      }
    },
  });
  statusLine(answer.not_on_page ? "Answer from general knowledge." : "Grounded on this page.");
}

async function runGuide(client: EngineClient, snapshotId: string,
                        query: string,
                        pathsById: Map<number, string>): Promise<void> {
  const { session_id } = await client.guideStart(snapshotId, query);
  const container = document.getElementById("pg-answer");
  if (!container) return;

  const page: GuideLoopPage = {
    showTarget: (elementId, instruction) => {
      const path = elementId !== null ? pathsById.get(elementId) ?? null : null;
      void sendToPage({ type: "guideTarget", path, instruction });
    },
    clearTarget: () => void sendToPage({ type: "guideTarget", path: null, instruction: "" }),
    recapture: async () => {
      const freshId = await captureAndUpload(client);
      const fresh = await getIndexPaths(client, freshId);
      pathsById.clear();
      fresh.forEach((value, key) => pathsById.set(key, value));
      return freshId;
    },
  };
  const view: GuideLoopView = {
    showCard: (card, hooks) => renderStepCard(document, container, card, hooks),
    showNotice: (_kind, message) => statusLine(message),
  };
  const finalState = await runGuideLoop(client, session_id, page, view);
  statusLine(`Guide session ${finalState}.`);
}

async function runHide(client: EngineClient, snapshotId: string,
                       request: string,
                       pathsById: Map<number, string>): Promise<void> {
  const proposal = await client.hidePropose(snapshotId, request);
  const container = document.getElementById("pg-answer");
  if (!container) return;
  renderHideReview(document, container, proposal, {
    onJump: (elementId) => {
      const path = pathsById.get(elementId);
      if (path) {
        void sendToPage({
          type: "highlight",
          items: [{ path, start: null, end: null, colorSlot: 3, key: `jump-${elementId}` }],
          scrollKey: `jump-${elementId}`,
        });
      }
    },
    onConfirm: async (confirmedIds) => {
      const applied = await client.hideApply(snapshotId, confirmedIds);
      await sendToPage({ type: "applyHide", directives: applied.directives });
      statusLine(`${applied.directives.length} element(s) hidden.`);
    },
  });
}

export async function submitQuery(query: string): Promise<void> {
  statusLine("working…");
  const client = new EngineClient(await loadHandshake());
  const snapshotId = await captureAndUpload(client);
  const pathsById = await getIndexPaths(client, snapshotId);
  const decision = await client.route(snapshotId, query);
  statusLine(`→ ${decision.handler} (${decision.reason})`);
  if (decision.handler === "guide") {
    await runGuide(client, snapshotId, query, pathsById);
  } else if (decision.handler === "hide") {
    await runHide(client, snapshotId, query, pathsById);
  } else {
    // image_find / pdf_find are not implemented engine-side; find is the
    // default for everything else
    await runFind(client, snapshotId, query, pathsById);
  }
}

function wirePanel(): void {
  const input = document.getElementById("pg-query") as HTMLInputElement | null;
  const button = document.getElementById("pg-submit");
  if (!input || !button) return;
  button.addEventListener("click", () => {
    const query = input.value.trim();
    if (!query) return;
    void submitQuery(query).catch((error) => statusLine(String(error)));
  });
}

if (typeof document !== "undefined" && document.getElementById("pg-query")) {
  wirePanel();
}
