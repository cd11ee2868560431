/** Node/annotation colors by type; dictionary lists get stable hues. */

const FIXED: Record<string, string> = {
  PER: "#d95f02",
  ORG: "#7570b3",
  LOC: "#1b9e77",
  EMAIL: "#e7298a",
  PHONE: "#66a61e",
  URL: "#a6761d",
  TIME: "#2c7fb8",
  KEYTERM: "#e6ab02",
};

export function typeColor(aType: string): string {
  const fixed = FIXED[aType];
  if (fixed) return fixed;
  let hash = 0;
  for (const ch of aType) hash = (hash * 31 + ch.charCodeAt(0)) >>> 0;
  return `hsl(${hash % 360}, 55%, 45%)`;
}
