// Console actions, kept DOM-free so the screens stay thin and the flows are
// testable headlessly.

import { GatewayApi, PutResult, RecordWire, StateWire } from "./api";
import { JsonValue } from "./canonical";
import {
  ContextForm,
  buildContextTx,
  buildDataTx,
  buildUpdateTx,
  buildUserTx,
  contextFormErrors,
  findContextByName,
  isTransactionId,
  relationFields,
} from "./model";
import { LocalWallet } from "./wallet";

export class FormValidationError extends Error {
  constructor(public problems: string[]) {
    super(problems.join("; "));
  }
}

export async function authorContext(
  api: GatewayApi,
  wallet: LocalWallet,
  form: ContextForm,
): Promise<PutResult> {
  const problems = contextFormErrors(form);
  if (problems.length) {
    throw new FormValidationError(problems); // blocked before submission
  }
  return api.putContext(buildContextTx(form, wallet.signer));
}

export async function registerUser(
  api: GatewayApi,
  adminWallet: LocalWallet,
  username: string,
  userPublicKeyB58: string,
  metadata?: Record<string, JsonValue>,
): Promise<PutResult> {
  return api.putUser(buildUserTx(username, userPublicKeyB58, adminWallet.signer, metadata));
}

// find and remember the ledger user record matching the wallet's key
export async function linkWalletUser(api: GatewayApi, wallet: LocalWallet): Promise<string | null> {
  for (const state of await api.userStates()) {
    if (state.data["public_key"] === wallet.publicKey) {
      wallet.setUserId(state.asset_id);
      return state.asset_id;
    }
  }
  return null;
}

export interface CheckResult {
  property: string;
  value: string;
  status: "pass" | "fail";
}

export async function signOffQualityCheck(
  api: GatewayApi,
  wallet: LocalWallet,
  orderLineId: string,
  checkNo: string,
  results: CheckResult[],
): Promise<PutResult> {
  if (!wallet.userId) {
    throw new FormValidationError(["wallet is not linked to a registered user"]);
  }
  if (!results.length) {
    throw new FormValidationError(["at least one checked property is required"]);
  }
  const context = await findContextByName(api, "quality_checks");
  if (!context) {
    throw new FormValidationError(["no quality_checks context on the ledger"]);
  }
  const overall = results.every((r) => r.status === "pass") ? "pass" : "fail";
  const tx = buildDataTx(
    context.asset_id,
    wallet.userId,
    wallet.signer,
    { check_no: checkNo, order_line: orderLineId },
    {
      status: overall,
      checks: results.map((r) => ({ property: r.property, value: r.value, status: r.status })),
      signed_off_at: new Date().toISOString(),
    },
  );
  return api.putTransaction(tx);
}

// metadata amendment that always re-reads the chain head first (avoids 409s)
export async function amendDataAsset(
  api: GatewayApi,
  wallet: LocalWallet,
  assetId: string,
  metadata: Record<string, JsonValue>,
): Promise<PutResult> {
  const head = (await api.transactionState(assetId)).last_transaction_id;
  return api.putTransaction(buildUpdateTx(assetId, head, wallet.signer, metadata));
}

export interface MetadataDiff {
  added: string[];
  removed: string[];
  changed: string[];
}

export interface ChainStep {
  record: RecordWire;
  signer: string;
  signerName: string | null;
  diff: MetadataDiff | null; // null on the create step
}

export interface RelationLink {
  field: string;
  assetId: string;
}

export interface ExplorerView {
  kind: "asset" | "search" | "empty";
  query: string;
  assetKind?: "data" | "context" | "user";
  state?: StateWire;
  contextName?: string;
  chain: ChainStep[];
  parents: RelationLink[];
  children: StateWire[];
  results: StateWire[];
}

function metadataOf(tx: Record<string, JsonValue>): Record<string, JsonValue> {
  const metadata = tx["metadata"];
  if (metadata && typeof metadata === "object" && !Array.isArray(metadata)) {
    return metadata as Record<string, JsonValue>;
  }
  return {};
}

function diffMetadata(previous: Record<string, JsonValue>, next: Record<string, JsonValue>): MetadataDiff {
  const added = Object.keys(next).filter((k) => !(k in previous));
  const removed = Object.keys(previous).filter((k) => !(k in next));
  const changed = Object.keys(next).filter(
    (k) => k in previous && JSON.stringify(previous[k]) !== JSON.stringify(next[k]),
  );
  return { added, removed, changed };
}

async function chainSteps(api: GatewayApi, records: RecordWire[]): Promise<ChainStep[]> {
  const names = new Map<string, string>();
  for (const state of await api.userStates()) {
    const key = state.data["public_key"];
    const name = state.data["username"];
    if (typeof key === "string" && typeof name === "string") names.set(key, name);
  }
  const steps: ChainStep[] = [];
  let effective: Record<string, JsonValue> = {};
  for (const [index, record] of records.entries()) {
    const signer = String(record.transaction["public_key"] ?? "");
    const carries = "metadata" in record.transaction;
    const next = carries ? metadataOf(record.transaction) : effective;
    steps.push({
      record,
      signer,
      signerName: names.get(signer) ?? null,
      diff: index === 0 ? null : diffMetadata(effective, next),
    });
    effective = next;
  }
  return steps;
}

export async function explore(api: GatewayApi, query: string): Promise<ExplorerView> {
  const trimmed = query.trim();
  const empty: ExplorerView = { kind: "empty", query: trimmed, chain: [], parents: [], children: [], results: [] };
  if (!trimmed) return empty;

  if (isTransactionId(trimmed)) {
    const probes: Array<["data" | "context" | "user", () => Promise<ExplorerView>]> = [
      ["data", async () => {
        const state = await api.transactionState(trimmed);
        const records = await api.transactionsByAsset(trimmed);
        const creator = records[0]?.transaction;
        const contextId = creator ? String(creator["context_id"] ?? "") : "";
        const parents: RelationLink[] = [];
        let contextName: string | undefined;
        if (contextId) {
          const context = await api.contextState(contextId);
          contextName = String(context.metadata["name"] ?? "");
          for (const field of relationFields(context)) {
            const section = state.data[field.key] !== undefined ? state.data : state.metadata;
            const value = section[field.key];
            const values = field.array && Array.isArray(value) ? value : [value];
            for (const v of values) {
              if (isTransactionId(v)) parents.push({ field: field.key, assetId: v });
            }
          }
        }
        return {
          kind: "asset", query: trimmed, assetKind: "data", state, contextName,
          chain: await chainSteps(api, records),
          parents,
          children: await api.transactionStatesByParent(trimmed),
          results: [],
        };
      }],
      ["context", async () => ({
        kind: "asset", query: trimmed, assetKind: "context",
        state: await api.contextState(trimmed),
        chain: await chainSteps(api, await api.contextHistory(trimmed)),
        parents: [], children: await api.transactionStatesByContext(trimmed), results: [],
      })],
      ["user", async () => ({
        kind: "asset", query: trimmed, assetKind: "user",
        state: await api.userState(trimmed),
        chain: await chainSteps(api, await api.userHistory(trimmed)),
        parents: [], children: [], results: [],
      })],
    ];
    for (const [, probe] of probes) {
      try {
        return await probe();
      } catch {
        continue; // not this kind; 404s fall through to the next probe
      }
    }
    return empty;
  }

  try {
    const results = await api.search(trimmed);
    return { kind: "search", query: trimmed, chain: [], parents: [], children: [], results };
  } catch {
    return empty;
  }
}

export async function certificatesForOrderLine(api: GatewayApi, orderLineId: string): Promise<StateWire[]> {
  const certContext = await findContextByName(api, "conformance_certificates");
  if (!certContext) return [];
  const related = await api.transactionStatesByParent(orderLineId);
  const certAssets = new Set(
    (await api.transactionStatesByContext(certContext.asset_id)).map((s) => s.asset_id),
  );
  return related.filter((s) => certAssets.has(s.asset_id));
}
