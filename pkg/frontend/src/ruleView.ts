/**
 * Display-only decomposition of a Snort rule into element panels.  The
 * service remains the source of truth for classification; this only
 * splits text for presentation and falls back to raw text on any input
 * it cannot split.
 */

export interface RuleElements {
  action: string;
  fiveTuple: {
    protocol: string;
    srcAddr: string;
    srcPort: string;
    direction: string;
    dstAddr: string;
    dstPort: string;
  };
  msg: string | null;
  classtype: string | null;
  metadata: string[];
  references: string[];
  otherOptions: { key: string; value: string | null }[];
}

export function splitRule(text: string): RuleElements | null {
  const open = text.indexOf("(");
  if (open < 0 || !text.trimEnd().endsWith(")")) return null;
  const header = text.slice(0, open).trim().split(/\s+/);
  if (header.length !== 7) return null;
  const [action, protocol, srcAddr, srcPort, direction, dstAddr, dstPort] = header;
  if (direction !== "->" && direction !== "<>") return null;

  const body = text.slice(open + 1, text.lastIndexOf(")"));
  const elements: RuleElements = {
    action,
    fiveTuple: { protocol, srcAddr, srcPort, direction, dstAddr, dstPort },
    msg: null,
    classtype: null,
    metadata: [],
    references: [],
    otherOptions: [],
  };
  for (const option of splitOptions(body)) {
    const colon = option.indexOf(":");
    const key = (colon < 0 ? option : option.slice(0, colon)).trim();
    const value = colon < 0 ? null : option.slice(colon + 1).trim();
    if (key === "msg" && value !== null) {
      elements.msg = unquote(value);
    } else if (key === "classtype" && value !== null) {
      elements.classtype = value;
    } else if (key === "metadata" && value !== null) {
      elements.metadata.push(value);
    } else if (key === "reference" && value !== null) {
      elements.references.push(value);
    } else {
      elements.otherOptions.push({ key, value });
    }
  }
  return elements;
}

/** Split on `;` outside quoted strings; honors backslash escapes. */
function splitOptions(body: string): string[] {
  const out: string[] = [];
  let current = "";
  let inQuotes = false;
  let escaped = false;
  for (const ch of body) {
    if (escaped) {
      current += ch;
      escaped = false;
    } else if (ch === "\\" && inQuotes) {
      current += ch;
      escaped = true;
    } else if (ch === '"') {
      current += ch;
      inQuotes = !inQuotes;
    } else if (ch === ";" && !inQuotes) {
      if (current.trim()) out.push(current.trim());
      current = "";
    } else {
      current += ch;
    }
  }
  if (current.trim()) out.push(current.trim());
  return out;
}

function unquote(value: string): string {
  if (value.startsWith('"') && value.endsWith('"') && value.length >= 2) {
    return value.slice(1, -1).replace(/\\(.)/g, "$1");
  }
  return value;
}
