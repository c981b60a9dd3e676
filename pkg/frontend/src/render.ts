/**
 * HTML string helpers shared by the views.
 *
 * Every API-sourced value shown to the analyst goes through fld(), which
 * tags the element with the slash-separated path of the field inside the
 * view's payloads. That keeps each displayed number traceable to exactly
 * one API response field, and the equivalence tests enforce it by
 * resolving every tagged path against an independent fetch.
 */

export function esc(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

/** How raw field values become text. Kept deliberately trivial: the UI
 * must not compute anything on top of what the API said. */
export function display(value: unknown): string {
  if (value === null || value === undefined) return "n/a";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") return String(value);
  return String(value);
}

export function fld(path: string, value: unknown): string {
  return `<span class="fld" data-field="${esc(path)}">${esc(display(value))}</span>`;
}

/** Internal navigation link; app.ts intercepts clicks on [data-nav]. */
export function navLink(href: string, inner: string, cls = ""): string {
  const classAttr = cls ? ` class="${esc(cls)}"` : "";
  return `<a href="${esc(href)}" data-nav${classAttr}>${inner}</a>`;
}

export function badge(text: string, tone: "ok" | "warn" | "bad" | "muted"): string {
  return `<span class="badge badge-${tone}">${esc(text)}</span>`;
}

export function section(title: string, inner: string): string {
  return `<section><h2>${esc(title)}</h2>${inner}</section>`;
}

export function errorBanner(status: number, detail: string): string {
  const label = status === 0 ? "API unreachable" : `API error ${status}`;
  return `<div class="banner banner-error" role="alert">${esc(label)}: ${esc(detail)}</div>`;
}

export function infoBanner(text: string): string {
  return `<div class="banner banner-info">${esc(text)}</div>`;
}
