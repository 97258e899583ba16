// Canonical JSON: unique byte form for signing and id derivation.
// Keys sorted by UTF-16 code units, JSON.stringify escaping and number
// notation, no whitespace. Must stay byte-identical with the gateway's
// canonicalizer; the shared vector files pin that down.

export type JsonValue = null | boolean | number | string | JsonValue[] | { [key: string]: JsonValue };

export class NonCanonicalizableError extends Error {}

export function canonicalString(value: JsonValue): string {
  if (value === null || value === true || value === false) {
    return JSON.stringify(value);
  }
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new NonCanonicalizableError(`non-finite number: ${value}`);
    }
    return JSON.stringify(value);
  }
  if (typeof value === "string") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalString).join(",") + "]";
  }
  if (typeof value === "object") {
    const keys = Object.keys(value).sort(); // default sort = UTF-16 code unit order
    const parts = keys.map((key) => JSON.stringify(key) + ":" + canonicalString(value[key]));
    return "{" + parts.join(",") + "}";
  }
  throw new NonCanonicalizableError(`unsupported value: ${typeof value}`);
}

export function canonicalize(value: JsonValue): Uint8Array {
  return new TextEncoder().encode(canonicalString(value));
}
