export function escapeHtml(value: unknown): string {
  return String(value)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Tagged template that escapes every interpolation. */
export function html(strings: TemplateStringsArray, ...values: unknown[]): string {
  let out = "";
  strings.forEach((part, i) => {
    out += part;
    if (i < values.length) {
      const value = values[i];
      out += value instanceof Raw ? value.text : escapeHtml(value);
    }
  });
  return out;
}

export class Raw {
  constructor(public readonly text: string) {}
}

export function raw(text: string): Raw {
  return new Raw(text);
}

export function errorNotice(code: string, message: string): string {
  if (code === "feature_disabled") {
    return html`<div class="notice notice-disabled" data-code="${code}">
      This feature is disabled for your experiment group. (${message})
    </div>`;
  }
  return html`<div class="notice notice-error" data-code="${code}">${code}: ${message}</div>`;
}
