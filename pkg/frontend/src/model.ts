// Wire-object builders and the client-side mirror of the context field rules,
// so malformed definitions are caught in the form before submission.

import { JsonValue } from "./canonical";
import { GatewayApi, StateWire } from "./api";
import { KeyPair, publicKeyB58, signTransaction } from "./crypto";

export const VALUE_TYPES = ["array", "boolean", "image", "number", "object", "relation", "string", "time"] as const;
export type ValueType = (typeof VALUE_TYPES)[number];
export const CONTENT_TYPES = VALUE_TYPES.filter((t) => t !== "array");

const TXID_RE = /^[0-9a-f]{64}$/;

export function isTransactionId(value: unknown): value is string {
  return typeof value === "string" && TXID_RE.test(value);
}

export interface FieldSpecForm {
  key: string;
  type: ValueType | "";
  content?: ValueType | "";
  parent?: string;
  searchable?: boolean;
  required?: boolean;
  description?: string;
  section: "data" | "metadata";
}

export interface ContextForm {
  name: string;
  description?: string;
  permissions: string[];
  fields: FieldSpecForm[];
  version?: { major: number; minor?: number };
}

// mirrors the gateway's field-spec rules; returns human-readable problems
export function contextFormErrors(form: ContextForm): string[] {
  const errors: string[] = [];
  if (!form.name.trim()) {
    errors.push("context name is required");
  }
  const seen = new Set<string>();
  for (const field of form.fields) {
    const label = field.key || "(unnamed field)";
    if (!field.key.trim()) {
      errors.push("every field needs a key");
    }
    const dedupeKey = `${field.section}:${field.key}`;
    if (seen.has(dedupeKey)) {
      errors.push(`${label}: duplicate key in ${field.section}`);
    }
    seen.add(dedupeKey);
    if (!field.type) {
      errors.push(`${label}: type is required`);
      continue;
    }
    if (field.type === "array" && !field.content) {
      errors.push(`${label}: array fields need a content type`);
    }
    if (field.type !== "array" && field.content) {
      errors.push(`${label}: content is only valid for arrays`);
    }
    const relationLike = field.type === "relation" || field.content === "relation";
    if (relationLike && !isTransactionId(field.parent ?? "")) {
      errors.push(`${label}: relation fields need a parent context id (64 hex chars)`);
    }
    if (!relationLike && field.parent) {
      errors.push(`${label}: parent is only valid for relation fields`);
    }
  }
  return errors;
}

function specWire(field: FieldSpecForm): Record<string, JsonValue> {
  const spec: Record<string, JsonValue> = { type: field.type };
  if (field.content) spec.content = field.content;
  if (field.parent) spec.parent = field.parent;
  if (field.searchable) spec.searchable = true;
  if (field.required === false) spec.required = false;
  if (field.description) spec.description = field.description;
  return spec;
}

export function buildContextTx(form: ContextForm, signer: KeyPair): Record<string, JsonValue> {
  const contextData: Record<string, JsonValue> = {};
  const contextMetadata: Record<string, JsonValue> = {};
  for (const field of form.fields) {
    (field.section === "data" ? contextData : contextMetadata)[field.key] = specWire(field);
  }
  const data: Record<string, JsonValue> = {};
  if (Object.keys(contextData).length) data.context_data = contextData;
  if (Object.keys(contextMetadata).length) data.context_metadata = contextMetadata;
  if (form.version) data.version = { major: form.version.major, minor: form.version.minor ?? 0 };
  const metadata: Record<string, JsonValue> = { name: form.name, permissions: form.permissions };
  if (form.description) metadata.description = form.description;
  return signTransaction({ data, metadata, public_key: publicKeyB58(signer) }, signer);
}

export function buildUserTx(
  username: string,
  userPublicKeyB58: string,
  signer: KeyPair,
  metadata?: Record<string, JsonValue>,
): Record<string, JsonValue> {
  const tx: Record<string, JsonValue> = { data: { username, public_key: userPublicKeyB58 } };
  if (metadata) tx.metadata = metadata;
  tx.public_key = publicKeyB58(signer);
  return signTransaction(tx, signer);
}

export function buildDataTx(
  contextId: string,
  userId: string,
  signer: KeyPair,
  data?: Record<string, JsonValue>,
  metadata?: Record<string, JsonValue>,
): Record<string, JsonValue> {
  const tx: Record<string, JsonValue> = { context_id: contextId, user_id: userId };
  if (data) tx.data = data;
  if (metadata) tx.metadata = metadata;
  tx.public_key = publicKeyB58(signer);
  return signTransaction(tx, signer);
}

export function buildUpdateTx(
  assetId: string,
  inputId: string,
  signer: KeyPair,
  metadata?: Record<string, JsonValue>,
): Record<string, JsonValue> {
  const tx: Record<string, JsonValue> = { asset_id: assetId, input_id: inputId };
  if (metadata !== undefined) tx.metadata = metadata;
  tx.public_key = publicKeyB58(signer);
  return signTransaction(tx, signer);
}

export async function findContextByName(api: GatewayApi, name: string): Promise<StateWire | null> {
  for (const state of await api.contextStates()) {
    if (state.metadata["name"] === name) return state;
  }
  return null;
}

// (field key, spec) pairs of relation-typed fields in a context state
export function relationFields(context: StateWire): Array<{ key: string; parent: string; array: boolean }> {
  const out: Array<{ key: string; parent: string; array: boolean }> = [];
  for (const section of ["context_data", "context_metadata"]) {
    const specs = context.data[section];
    if (!specs || typeof specs !== "object" || Array.isArray(specs)) continue;
    for (const [key, spec] of Object.entries(specs)) {
      if (!spec || typeof spec !== "object" || Array.isArray(spec)) continue;
      const s = spec as Record<string, JsonValue>;
      const relationLike = s.type === "relation" || (s.type === "array" && s.content === "relation");
      if (relationLike && typeof s.parent === "string") {
        out.push({ key, parent: s.parent, array: s.type === "array" });
      }
    }
  }
  return out;
}
