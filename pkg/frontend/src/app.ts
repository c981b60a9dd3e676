/**
 * Browser wiring: URL ↔ state, event delegation, request cancellation.
 *
 * Every navigation pushes an encoded URL and re-runs the load pipeline;
 * in-flight calls for a superseded view are aborted. On API failure the
 * previous content stays on screen, marked stale, under an error banner.
 */

import { ApiClient, ApiError } from "./api.js";
import { loadView, renderView } from "./controller.js";
import { errorBanner } from "./render.js";
import { decodeState, encodeState, type ViewState } from "./state.js";

declare global {
  interface Window {
    ONIONSCOPE_API?: string;
  }
}

const api = new ApiClient(window.ONIONSCOPE_API ?? "");
const main = document.getElementById("main") as HTMLElement;
const bannerHost = document.getElementById("banner") as HTMLElement;

let current: ViewState = decodeState(window.location.search);
let inflight: AbortController | null = null;

function setBanner(html: string): void {
  bannerHost.innerHTML = html;
}

async function show(state: ViewState, push: boolean): Promise<void> {
  inflight?.abort();
  const ac = new AbortController();
  inflight = ac;
  current = state;
  if (push) {
    const qs = encodeState(state);
    window.history.pushState(null, "", window.location.pathname + qs);
  }
  main.classList.add("loading");
  let loaded;
  try {
    loaded = await loadView(state, api, ac.signal);
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    throw err;
  } finally {
    if (inflight === ac) main.classList.remove("loading");
  }
  if (ac.signal.aborted) return; // a newer navigation took over
  if (loaded.error) {
    setBanner(errorBanner(loaded.error.status, loaded.error.detail));
    main.classList.add("stale");
    return;
  }
  setBanner("");
  main.classList.remove("stale");
  main.innerHTML = renderView(loaded);
}

function queryOf(href: string): string {
  const i = href.indexOf("?");
  return i === -1 ? "" : href.slice(i);
}

document.addEventListener("click", (ev) => {
  const target = (ev.target as Element).closest("a[data-nav]");
  if (!target) return;
  ev.preventDefault();
  void show(decodeState(queryOf(target.getAttribute("href") ?? "")), true);
});

document.addEventListener("submit", (ev) => {
  const form = ev.target as HTMLFormElement;
  if (form.matches("[data-search]")) {
    ev.preventDefault();
    const q = (form.elements.namedItem("q") as HTMLInputElement).value.trim();
    void show({ ...current, view: "search", q, page: 1 }, true);
  } else if (form.matches("[data-ris]")) {
    ev.preventDefault();
    void submitRis(form);
  }
});

async function submitRis(form: HTMLFormElement): Promise<void> {
  const dist = Number((form.elements.namedItem("dist") as HTMLInputElement).value);
  const fileInput = form.elements.namedItem("image") as HTMLInputElement;
  const file = fileInput.files?.[0];
  if (file) {
    let b64: string;
    try {
      b64 = await fileToBase64(file);
    } catch {
      setBanner(errorBanner(0, "could not read the selected file"));
      return;
    }
    try {
      const resp = await api.ris({ image_b64: b64, max_distance: dist });
      void show({ ...current, view: "ris", hash: resp.query_hash,
                  maxDistance: dist }, true);
    } catch (err) {
      if (err instanceof ApiError) {
        // undecodable upload and friends: validation message, view unchanged
        setBanner(errorBanner(err.status, err.detail));
        return;
      }
      throw err;
    }
    return;
  }
  const hash = (form.elements.namedItem("hash") as HTMLInputElement)
    .value.trim().toLowerCase();
  if (!/^[0-9a-f]{1,16}$/.test(hash)) {
    setBanner(errorBanner(0, "enter a hash of 1..16 hex digits or pick a file"));
    return;
  }
  void show({ ...current, view: "ris", hash, maxDistance: dist }, true);
}

function fileToBase64(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onerror = () => reject(reader.error);
    reader.onload = () => {
      const url = reader.result as string;
      resolve(url.slice(url.indexOf(",") + 1));
    };
    reader.readAsDataURL(file);
  });
}

// Distance slider: live label while dragging, re-query on release.
document.addEventListener("input", (ev) => {
  const el = ev.target as HTMLInputElement;
  if (el.matches('form[data-ris] input[name="dist"]')) {
    const out = el.parentElement?.querySelector("output");
    if (out) out.textContent = el.value;
  }
});
document.addEventListener("change", (ev) => {
  const el = ev.target as HTMLInputElement;
  if (el.matches('form[data-ris] input[name="dist"]') && current.hash != null) {
    void show({ ...current, view: "ris", maxDistance: Number(el.value) }, true);
  }
});

window.addEventListener("popstate", () => {
  void show(decodeState(window.location.search), false);
});

void show(current, false);
