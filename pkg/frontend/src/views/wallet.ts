/**
 * Wallet detail: clustering features, attribution labels (each label is
 * a domain whose pages donate to this wallet, so labels pivot back to
 * the domain view), and money-flow neighbors with amounts.
 */

import type { WalletResponse } from "../api.js";
import { badge, esc, fld, navLink, section } from "../render.js";
import { encodeState, togglePin, type ViewState } from "../state.js";

export function renderWalletNotFound(state: ViewState): string {
  return `<div class="notfound">
    <h2>wallet not found</h2>
    <p>No wallet <code>${esc(state.wallet ?? "")}</code> in the store.
       Wallets appear after an analysis run.</p>
    ${navLink(encodeState({ ...state, view: "search" }) || "?", "back to search")}
  </div>`;
}

export function renderWallet(state: ViewState, payload: WalletResponse): string {
  const w = payload.wallet;
  const pinned = state.pins.some(
    (p) => p.kind === "wallet" && p.id === w.wallet_id);
  const pinHref = encodeState(
    togglePin(state, { kind: "wallet", id: w.wallet_id })) || "?";

  const head = `<header class="detail-head">
    <h1>wallet <code>${fld("wallet/wallet/wallet_id", w.wallet_id)}</code></h1>
    ${w.outlier ? badge("outlier", "bad") : ""}
    ${navLink(pinHref, pinned ? "unpin" : "pin", "pin-toggle")}
  </header>
  <dl class="kv">
    <dt>outlier</dt><dd>${fld("wallet/wallet/outlier", w.outlier)}</dd>
  </dl>`;

  const labels = w.labels.map((domain, i) =>
    `<li>${navLink(encodeState({ ...state, view: "domain", domain }) || "?",
                   fld(`wallet/wallet/labels/${i}`, domain))}</li>`).join("");

  const addresses = w.addresses.map((a, i) =>
    `<li><code>${fld(`wallet/wallet/addresses/${i}`, a)}</code></li>`).join("");

  const featureRows = Object.keys(w.features).sort().map((name) =>
    `<dt>${esc(name)}</dt>` +
    `<dd>${fld(`wallet/wallet/features/${name}`, w.features[name])}</dd>`)
    .join("");

  const neighborRows = payload.neighbors.map((e, i) => {
    const p = (name: string) => `wallet/neighbors/${i}/${name}`;
    const link = (id: string, inner: string) => navLink(
      encodeState({ ...state, view: "wallet", wallet: id }) || "?", inner);
    return `<tr>
      <td>${link(e.src, `<code>${fld(p("src"), e.src)}</code>`)}</td>
      <td>${link(e.dst, `<code>${fld(p("dst"), e.dst)}</code>`)}</td>
      <td class="num">${fld(p("n_transactions"), e.n_transactions)}</td>
      <td class="num">${fld(p("total_satoshis"), e.total_satoshis)}</td>
      <td class="num">$${fld(p("total_usd"), e.total_usd)}</td>
    </tr>`;
  }).join("");

  return [
    head,
    section("labels (attributing domains)",
            labels ? `<ul class="linklist">${labels}</ul>`
                   : `<p class="empty">no attributions</p>`),
    section("member addresses",
            addresses ? `<ul class="linklist">${addresses}</ul>`
                      : `<p class="empty">none</p>`),
    section("features",
            featureRows ? `<dl class="kv">${featureRows}</dl>`
                        : `<p class="empty">no features computed</p>`),
    section("money-flow neighbors",
            neighborRows
              ? `<div class="tablewrap"><table class="matches">
                   <thead><tr><th>from</th><th>to</th><th>txs</th>
                   <th>satoshis</th><th>USD</th></tr></thead>
                   <tbody>${neighborRows}</tbody></table></div>`
              : `<p class="empty">no recorded flows</p>`),
  ].join("\n");
}
