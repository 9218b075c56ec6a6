// Minimal declarations for the extension APIs this panel uses; kept local so
// the build does not depend on an external type package.

interface ChromeMessageSender {
  tab?: { id?: number };
}

interface ChromeRuntime {
  onMessage: {
    addListener(
      handler: (
        message: unknown,
        sender: ChromeMessageSender,
        sendResponse: (response?: unknown) => void,
      ) => boolean | void,
    ): void;
  };
  lastError?: { message?: string };
}

interface ChromeTabs {
  query(query: { active: boolean; currentWindow: boolean }):
    Promise<{ id?: number; url?: string }[]>;
  sendMessage(tabId: number, message: unknown): Promise<unknown>;
}

interface ChromeStorageArea {
  get(keys: string[] | string): Promise<Record<string, unknown>>;
  set(items: Record<string, unknown>): Promise<void>;
}

interface ChromeSidePanel {
  setPanelBehavior(behavior: { openPanelOnActionClick: boolean }): Promise<void>;
}

declare const chrome: {
  runtime: ChromeRuntime;
  tabs: ChromeTabs;
  storage: { local: ChromeStorageArea };
  sidePanel?: ChromeSidePanel;
};
