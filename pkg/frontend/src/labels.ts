// Label-set editing rules. The server re-validates, but the UI must never
// even offer an invalid submission: NoErr excludes every other label, and a
// submission needs at least one label.

export const NO_ERROR = "NoErr";

export function toggleLabel(current: string[], label: string, checked: boolean): string[] {
  const active = new Set(current);
  if (!checked) {
    active.delete(label);
    return [...active];
  }
  if (label === NO_ERROR) {
    return [NO_ERROR];
  }
  active.delete(NO_ERROR);
  active.add(label);
  return [...active];
}

export function labelSelectionError(labels: string[]): string | null {
  if (labels.length === 0) {
    return "Select at least one label (use No Error for clean questions).";
  }
  if (labels.includes(NO_ERROR) && labels.length > 1) {
    return "No Error excludes all other labels.";
  }
  return null;
}

export function sortByCatalog(labels: string[], catalogOrder: string[]): string[] {
  const rank = new Map(catalogOrder.map((id, i) => [id, i]));
  return [...labels].sort((a, b) => (rank.get(a) ?? 99) - (rank.get(b) ?? 99));
}
