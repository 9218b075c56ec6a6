/**
 * Node-path addressing shared with the engine: each element is the chain of
 * tag:ordinal hops from the document root, where the ordinal counts earlier
 * same-tag siblings (e.g. "html:0/body:0/p:1" is the second <p> in <body>).
 */

export function pathOf(el: Element): string {
  const hops: string[] = [];
  let current: Element | null = el;
  while (current) {
    const tag = current.tagName.toLowerCase();
    let ordinal = 0;
    let sibling = current.previousElementSibling;
    while (sibling) {
      if (sibling.tagName.toLowerCase() === tag) ordinal += 1;
      sibling = sibling.previousElementSibling;
    }
    hops.push(`${tag}:${ordinal}`);
    current = current.parentElement;
  }
  return hops.reverse().join("/");
}

export function resolvePath(doc: Document, path: string): Element | null {
  let scope: Element[] = Array.from(doc.children);
  let found: Element | null = null;
  for (const hop of path.split("/")) {
    const at = hop.lastIndexOf(":");
    if (at <= 0) return null;
    const tag = hop.slice(0, at);
    const ordinal = Number(hop.slice(at + 1));
    if (!Number.isInteger(ordinal) || ordinal < 0) return null;
    let seen = 0;
    found = null;
    for (const el of scope) {
      if (el.tagName.toLowerCase() === tag) {
        if (seen === ordinal) {
          found = el;
          break;
        }
        seen += 1;
      }
    }
    if (!found) return null;
    scope = Array.from(found.children);
  }
  return found;
}
