export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function formatPct(value: number): string {
  return (value * 100).toFixed(1);
}

export function formatNum(value: number, digits = 3): string {
  return value.toFixed(digits);
}
