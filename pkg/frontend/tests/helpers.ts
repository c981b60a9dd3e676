/**
 * Test-side plumbing for the console/API equivalence suite.
 *
 * The key idea: render a view through the real pipeline, then replay the
 * view's request plan with plain fetch (no shared client code) and check
 * that every data-field span in the HTML resolves to the same value in
 * the raw JSON. Display formatting is re-implemented here independently
 * so a bug in the app's formatter cannot hide itself.
 */

import { expect } from "vitest";
import { ApiClient } from "../src/api.js";
import { loadView, renderView, type LoadedView, type RequestSpec } from "../src/controller.js";
import type { ViewState } from "../src/state.js";

export const MISSING: unique symbol = Symbol("missing");

export async function replay(base: string, spec: RequestSpec): Promise<unknown> {
  const res = await fetch(base + spec.path, {
    method: spec.method,
    headers: spec.body !== undefined
      ? { "content-type": "application/json" } : undefined,
    body: spec.body !== undefined ? JSON.stringify(spec.body) : undefined,
  });
  if (!res.ok) {
    throw new Error(`replay ${spec.method} ${spec.path} -> ${res.status}`);
  }
  return res.json();
}

export function unescapeHtml(s: string): string {
  return s
    .replaceAll("&lt;", "<")
    .replaceAll("&gt;", ">")
    .replaceAll("&quot;", '"')
    .replaceAll("&#39;", "'")
    .replaceAll("&amp;", "&");
}

export interface RenderedField {
  path: string;
  text: string;
}

const FIELD_RE = /<span class="fld" data-field="([^"]*)">([\s\S]*?)<\/span>/g;

/** All data-field spans in rendering order. fld() output never nests
 * markup, so a non-greedy scan to the closing tag is exact. */
export function extractFields(html: string): RenderedField[] {
  const out: RenderedField[] = [];
  for (const m of html.matchAll(FIELD_RE)) {
    out.push({ path: unescapeHtml(m[1] ?? ""), text: unescapeHtml(m[2] ?? "") });
  }
  return out;
}

/** Walk a slash-separated path through raw JSON (arrays take numeric
 * segments). Returns MISSING when any step is absent. */
export function resolvePath(
  payloads: Record<string, unknown>,
  fieldPath: string,
): unknown {
  let cur: unknown = payloads;
  for (const part of fieldPath.split("/")) {
    if (cur === null || typeof cur !== "object") return MISSING;
    if (!(part in (cur as Record<string, unknown>))) return MISSING;
    cur = (cur as Record<string, unknown>)[part];
  }
  return cur;
}

/** Independent re-statement of how the console prints a raw value. */
export function displayOracle(value: unknown): string {
  if (value === null || value === undefined) return "n/a";
  if (value === true) return "true";
  if (value === false) return "false";
  return String(value);
}

export interface InvestigationResult {
  loaded: LoadedView;
  html: string;
  raw: Record<string, unknown>;
  fields: RenderedField[];
}

/**
 * Run one scripted investigation: load and render the view, then verify
 * every rendered field against an independent replay of the same
 * requests. Returns everything for further structural assertions.
 */
export async function runInvestigation(
  base: string,
  state: ViewState,
): Promise<InvestigationResult> {
  const api = new ApiClient(base);
  const loaded = await loadView(state, api);
  const html = renderView(loaded);

  const raw: Record<string, unknown> = {};
  for (const spec of loaded.requests) {
    try {
      raw[spec.name] = await replay(base, spec);
    } catch {
      // e.g. 404 investigations: the view must then render no API fields
    }
  }

  const fields = extractFields(html);
  for (const f of fields) {
    const value = resolvePath(raw, f.path);
    expect(value, `no API field at path "${f.path}"`).not.toBe(MISSING);
    expect(f.text, `value mismatch at path "${f.path}"`)
      .toBe(displayOracle(value));
  }
  return { loaded, html, raw, fields };
}

/** Deterministic PRNG for property-style state generation. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function pick<T>(rand: () => number, items: readonly T[]): T {
  const idx = Math.floor(rand() * items.length);
  return items[Math.min(idx, items.length - 1)] as T;
}
