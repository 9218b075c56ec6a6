import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

export const TEST_PAGE_HTML = readFileSync(
  join(dirname(fileURLToPath(import.meta.url)), "..", "test-page", "index.html"),
  "utf-8",
);

export function loadTestPage(): Document {
  document.documentElement.innerHTML = TEST_PAGE_HTML
    .replace(/^<!DOCTYPE html>\s*/i, "")
    .replace(/^<html>|<\/html>\s*$/g, "");
  return document;
}
