// Service worker: open the side panel from the toolbar button.

if (typeof chrome !== "undefined" && chrome.sidePanel) {
  void chrome.sidePanel.setPanelBehavior({ openPanelOnActionClick: true });
}

export {};
