/**
 * Domain detail: status timeline, classifier outputs, mirror members,
 * attributed addresses (linking into the wallet view), flagged outbound
 * links, and the crawled page list.
 */

import type { DomainResponse } from "../api.js";
import { badge, esc, fld, navLink, section } from "../render.js";
import { encodeState, togglePin, type ViewState } from "../state.js";

export function renderDomainNotFound(state: ViewState): string {
  return `<div class="notfound">
    <h2>domain not found</h2>
    <p>No record for <code>${esc(state.domain ?? "")}</code>.
       It may never have been reached by a crawl.</p>
    ${navLink(encodeState({ ...state, view: "search" }) || "?", "back to search")}
  </div>`;
}

function timeline(payload: DomainResponse): string {
  const rows = payload.record.status_history.map((entry, i) => {
    const up = entry[1];
    return `<li class="tl-${up ? "up" : "down"}">
      <span class="tl-state">${fld(`domain/record/status_history/${i}/1`, up)}</span>
      at <span class="tl-time">${fld(`domain/record/status_history/${i}/0`, entry[0])}</span>
    </li>`;
  });
  if (!rows.length) return `<p class="empty">no probes recorded</p>`;
  return `<ol class="timeline">${rows.join("")}</ol>`;
}

export function renderDomain(state: ViewState, payload: DomainResponse): string {
  const r = payload.record;
  const pinned = state.pins.some((p) => p.kind === "domain" && p.id === r.domain);
  const pinHref = encodeState(
    togglePin(state, { kind: "domain", id: r.domain })) || "?";

  const headBadges = [
    `<span class="badge badge-${payload.status === "up" ? "ok" : "muted"}">` +
      `${fld("domain/status", payload.status)}</span>`,
  ];
  if (r.illicit === true) headBadges.push(badge("illicit", "bad"));
  if (r.tracking === true) headBadges.push(badge("tracking", "warn"));
  if (payload.outbound_flagged_urls.length) {
    headBadges.push(badge("flagged outbound links", "bad"));
  }

  const classifier = section("classifier outputs", `<dl class="kv">
    <dt>version</dt><dd>${fld("domain/record/version", r.version)}</dd>
    <dt>language</dt><dd>${fld("domain/record/language", r.language)}</dd>
    <dt>category</dt><dd>${fld("domain/record/category", r.category)}</dd>
    <dt>illicit</dt><dd>${fld("domain/record/illicit", r.illicit)}</dd>
    <dt>illicit score</dt><dd>${fld("domain/record/illicit_score", r.illicit_score)}</dd>
    <dt>tracking</dt><dd>${fld("domain/record/tracking", r.tracking)}</dd>
    <dt>template cluster</dt><dd>${fld("domain/record/template_cluster_id", r.template_cluster_id)}</dd>
    <dt>page count</dt><dd>${fld("domain/record/page_count", r.page_count)}</dd>
  </dl>`);

  const mirrors = payload.mirror_members.map((m, i) =>
    `<li>${navLink(encodeState({ ...state, view: "domain", domain: m }) || "?",
                   fld(`domain/mirror_members/${i}`, m))}</li>`).join("");

  const addresses = r.attributed_addresses.map((a, i) => {
    const shown = fld(`domain/record/attributed_addresses/${i}`, a);
    const wallet = payload.address_wallets[a];
    if (wallet === undefined) return `<li><code>${shown}</code></li>`;
    return `<li>${navLink(
      encodeState({ ...state, view: "wallet", wallet }) || "?",
      `<code>${shown}</code>`)} &rarr; wallet ${navLink(
      encodeState({ ...state, view: "wallet", wallet }) || "?",
      fld(`domain/address_wallets/${a}`, wallet))}</li>`;
  }).join("");

  const wallets = payload.attributed_wallets.map((w, i) =>
    `<li>${navLink(encodeState({ ...state, view: "wallet", wallet: w }) || "?",
                   fld(`domain/attributed_wallets/${i}`, w))}</li>`).join("");

  const flagged = payload.outbound_flagged_urls.map((u, i) =>
    `<li>${badge("malicious", "bad")} ` +
    `<code>${fld(`domain/outbound_flagged_urls/${i}`, u)}</code></li>`).join("");

  const pages = payload.pages.map((p, i) =>
    `<li><code>${fld(`domain/pages/${i}`, p)}</code></li>`).join("");

  return [
    `<header class="detail-head">
      <h1>${fld("domain/record/domain", r.domain)}</h1>
      ${headBadges.join(" ")}
      ${navLink(pinHref, pinned ? "unpin" : "pin", "pin-toggle")}
    </header>`,
    section("status timeline", timeline(payload)),
    classifier,
    section("mirror cluster members",
            mirrors ? `<ul class="linklist">${mirrors}</ul>`
                    : `<p class="empty">no mirrors detected</p>`),
    section("attributed addresses",
            addresses ? `<ul class="linklist">${addresses}</ul>`
                      : `<p class="empty">none attributed</p>`),
    section("attributed wallets",
            wallets ? `<ul class="linklist">${wallets}</ul>`
                    : `<p class="empty">none</p>`),
    section("outbound malicious links",
            flagged ? `<ul class="linklist">${flagged}</ul>`
                    : `<p class="empty">none flagged</p>`),
    section("crawled pages",
            pages ? `<ul class="linklist pages">${pages}</ul>`
                  : `<p class="empty">no pages stored</p>`),
  ].join("\n");
}
