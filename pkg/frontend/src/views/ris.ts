/**
 * Reverse image search: paste a 64-bit perceptual hash or upload an
 * image, pick a Hamming-distance cutoff, and browse matches grouped by
 * the serving domain. Uploads resolve to the query hash returned by the
 * API, which then lives in the URL like any other state.
 */

import type { RisResponse } from "../api.js";
import { esc, fld, infoBanner, navLink } from "../render.js";
import { encodeState, togglePin, type ViewState } from "../state.js";

function controls(state: ViewState): string {
  return `<form class="ris-controls" data-ris>
    <label>hash
      <input type="text" name="hash" value="${esc(state.hash ?? "")}"
             placeholder="16 hex digits" spellcheck="false">
    </label>
    <label>or image
      <input type="file" name="image" accept="image/*">
    </label>
    <label>max distance
      <input type="range" name="dist" min="0" max="64"
             value="${state.maxDistance}">
      <output>${state.maxDistance}</output>
    </label>
    <button type="submit">search images</button>
  </form>`;
}

function matchRow(host: string, i: number,
                  m: RisResponse["groups"][string][number],
                  state: ViewState): string {
  const p = (name: string) => `ris/groups/${host}/${i}/${name}`;
  const rerun = navLink(
    encodeState({ ...state, view: "ris", hash: m.perceptual_hash }) || "?",
    fld(p("perceptual_hash"), m.perceptual_hash), "hash-link");
  return `<tr>
    <td><code>${fld(p("src_url"), m.src_url)}</code></td>
    <td><code>${fld(p("page_url"), m.page_url)}</code></td>
    <td>${rerun}</td>
    <td class="num">${fld(p("distance"), m.distance)}</td>
  </tr>`;
}

export function renderRis(state: ViewState, payload: RisResponse | null): string {
  if (payload === null) {
    return controls(state) +
      infoBanner("Paste a stored perceptual hash or upload an image to search.");
  }

  const pinned = state.pins.some(
    (p) => p.kind === "image" && p.id === (state.hash ?? ""));
  const pinHref = state.hash
    ? encodeState(togglePin(state, { kind: "image", id: state.hash })) || "?"
    : null;

  const hosts = Object.keys(payload.groups).sort();
  const groups = hosts.map((host) => {
    const rows = (payload.groups[host] ?? [])
      .map((m, i) => matchRow(host, i, m, state)).join("");
    const title = navLink(
      encodeState({ ...state, view: "domain", domain: host }) || "?",
      esc(host));
    return `<section class="ris-group"><h3>${title}</h3>
      <div class="tablewrap"><table class="matches">
        <thead><tr><th>image</th><th>page</th><th>hash</th><th>distance</th></tr></thead>
        <tbody>${rows}</tbody>
      </table></div></section>`;
  }).join("");

  return [
    controls(state),
    `<header class="detail-head">
      <h1>query hash <code>${fld("ris/query_hash", payload.query_hash)}</code></h1>
      ${pinHref ? navLink(pinHref, pinned ? "unpin" : "pin", "pin-toggle") : ""}
    </header>`,
    groups || `<p class="empty">no stored images within distance ` +
              `${state.maxDistance}</p>`,
  ].join("\n");
}
