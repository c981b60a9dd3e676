/**
 * Search view: query box, facet filters, paginated hits.
 *
 * On the landing state (no query, no filters, first page) the view also
 * shows the corpus summary from /v1/status/summary, so an analyst starts
 * from the shape of the whole crawl.
 */

import type { SearchResponse, StatusSummary } from "../api.js";
import { esc, fld, navLink, section } from "../render.js";
import { encodeState, type SearchFilters, type ViewState } from "../state.js";

const FACET_ORDER = ["category", "language", "illicit", "tracked", "status"];

function searchHref(state: ViewState, patch: Partial<ViewState>): string {
  const next: ViewState = { ...state, view: "search", page: 1, ...patch };
  return encodeState(next) || "?";
}

/** Which filter patch a facet value click applies, or null when the value
 * has no equivalent query parameter (e.g. "unclassified" booleans). */
function facetFilter(facet: string, value: string): Partial<SearchFilters> | null {
  if (facet === "category" || facet === "language" || facet === "status") {
    return value === "unclassified" ? null : { [facet]: value };
  }
  if (facet === "illicit" || facet === "tracked") {
    if (value === "true") return { [facet]: true };
    if (value === "false") return { [facet]: false };
    return null;
  }
  return null;
}

function facetBlock(state: ViewState, facet: string,
                    counts: Record<string, number>): string {
  const rows = Object.keys(counts).sort().map((value) => {
    const count = fld(`search/facets/${facet}/${value}`, counts[value]);
    const patch = facetFilter(facet, value);
    const label = patch
      ? navLink(searchHref(state, { filters: { ...state.filters, ...patch } }),
                esc(value))
      : esc(value);
    return `<li>${label} <span class="count">${count}</span></li>`;
  });
  return `<div class="facet"><h3>${esc(facet)}</h3><ul>${rows.join("")}</ul></div>`;
}

function activeFilterChips(state: ViewState): string {
  const chips: string[] = [];
  const f = state.filters;
  const drop = (key: keyof SearchFilters, label: string) => {
    const rest = { ...state.filters };
    delete rest[key];
    chips.push(
      `<span class="chip">${esc(label)} ` +
      navLink(searchHref(state, { filters: rest }), "&times;", "chip-clear") +
      `</span>`);
  };
  if (f.category != null) drop("category", `category: ${f.category}`);
  if (f.language != null) drop("language", `language: ${f.language}`);
  if (f.illicit != null) drop("illicit", `illicit: ${f.illicit}`);
  if (f.tracked != null) drop("tracked", `tracked: ${f.tracked}`);
  if (f.status != null) drop("status", `status: ${f.status}`);
  if (!chips.length) return "";
  return `<div class="chips">${chips.join(" ")}</div>`;
}

function hitCard(state: ViewState, i: number,
                 hit: SearchResponse["hits"][number]): string {
  const p = (name: string) => `search/hits/${i}/${name}`;
  const open = navLink(
    encodeState({ ...state, view: "domain", domain: hit.domain }) || "?",
    fld(p("domain"), hit.domain), "hit-domain");
  const badges: string[] = [
    `<span class="badge badge-${hit.status === "up" ? "ok" : "muted"}">` +
      `${fld(p("status"), hit.status)}</span>`,
  ];
  if (hit.illicit === true) {
    badges.push(`<span class="badge badge-bad">illicit: ${fld(p("illicit"), hit.illicit)}</span>`);
  }
  if (hit.tracked === true) {
    badges.push(`<span class="badge badge-warn">tracked: ${fld(p("tracked"), hit.tracked)}</span>`);
  }
  const matched = hit.matched_pages.map((u, j) =>
    `<li>${fld(p(`matched_pages/${j}`), u)}</li>`).join("");
  return `<article class="hit">
    <div class="hit-head">${open} ${badges.join(" ")}</div>
    <dl class="kv">
      <dt>score</dt><dd>${fld(p("score"), hit.score)}</dd>
      <dt>category</dt><dd>${fld(p("category"), hit.category)}</dd>
      <dt>language</dt><dd>${fld(p("language"), hit.language)}</dd>
      <dt>pages</dt><dd>${fld(p("page_count"), hit.page_count)}</dd>
    </dl>
    ${matched ? `<ul class="matched">${matched}</ul>` : ""}
  </article>`;
}

function summaryPanel(summary: StatusSummary): string {
  const counters = (["domains", "documents", "wallets", "images"] as const)
    .map((k) => `<div class="counter"><span class="num">` +
                `${fld(`summary/${k}`, summary[k])}</span>` +
                `<span class="label">${k}</span></div>`)
    .join("");
  const breakdown = (name: "by_status" | "by_category" | "by_language") => {
    const items = Object.keys(summary[name]).sort().map((k) =>
      `<li>${esc(k)} <span class="count">` +
      `${fld(`summary/${name}/${k}`, summary[name][k])}</span></li>`).join("");
    return `<div class="facet"><h3>${esc(name.slice(3))}</h3><ul>${items}</ul></div>`;
  };
  return section("crawl summary",
    `<div class="counters">${counters}</div>` +
    `<div class="facets">${breakdown("by_status")}${breakdown("by_category")}` +
    `${breakdown("by_language")}</div>`);
}

export function renderSearch(state: ViewState, result: SearchResponse,
                             summary: StatusSummary | null): string {
  const form = `<form class="searchbar" data-search>
    <input type="search" name="q" value="${esc(state.q)}"
           placeholder="search crawled onion pages" aria-label="search terms">
    <button type="submit">search</button>
  </form>`;

  const facets = FACET_ORDER
    .filter((f) => result.facets[f] !== undefined)
    .map((f) => facetBlock(state, f, result.facets[f] ?? {}))
    .join("");

  const hits = result.hits.map((h, i) => hitCard(state, i, h)).join("");
  const pager: string[] = [];
  if (state.page > 1) {
    pager.push(navLink(encodeState({ ...state, view: "search", page: state.page - 1 }) || "?",
                       "&lsaquo; prev", "page-link"));
  }
  pager.push(`<span class="page-now">page ${state.page}</span>`);
  if (result.hits.length === state.pageSize) {
    pager.push(navLink(encodeState({ ...state, view: "search", page: state.page + 1 }) || "?",
                       "next &rsaquo;", "page-link"));
  }

  const results = section("results",
    `<p class="total">${fld("search/total", result.total)} matching domains</p>` +
    (hits || `<p class="empty">no results</p>`) +
    `<nav class="pager">${pager.join(" ")}</nav>`);

  return [
    form,
    activeFilterChips(state),
    summary ? summaryPanel(summary) : "",
    `<div class="split"><div class="facets side">${facets}</div>` +
      `<div class="main-col">${results}</div></div>`,
  ].join("\n");
}
