// Typed client over the gateway HTTP API. The console performs no writes
// except through the three PUT endpoints here.

import { JsonValue } from "./canonical";

export interface PutResult {
  id: string;
  timestamp: number;
}

export interface RecordWire {
  transaction: Record<string, JsonValue> & { id: string };
  timestamp: number;
  sequence: number;
  parents: string[];
  search_terms: string[];
  context_version?: string;
  block_ref?: { block_height: number; position: number };
}

export interface StateWire {
  asset_id: string;
  data: Record<string, JsonValue>;
  metadata: Record<string, JsonValue>;
  last_transaction_id: string;
  chain_length: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public stage: string,
    public detail: string,
  ) {
    super(`${status} ${stage}: ${detail}`);
  }
}

type Query = Record<string, string>;

export class GatewayApi {
  constructor(public baseUrl: string) {}

  private async request(method: string, path: string, query?: Query, body?: unknown): Promise<any> {
    const url = new URL(path, this.baseUrl);
    for (const [key, value] of Object.entries(query ?? {})) {
      url.searchParams.set(key, value);
    }
    const response = await fetch(url, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const stage = parsed?.stage ?? "Error";
      const detail = parsed?.detail ?? text;
      throw new ApiError(response.status, String(stage), String(detail));
    }
    return parsed;
  }

  putUser(tx: Record<string, JsonValue>): Promise<PutResult> {
    return this.request("PUT", "/user", undefined, tx);
  }

  putContext(tx: Record<string, JsonValue>): Promise<PutResult> {
    return this.request("PUT", "/context", undefined, tx);
  }

  putTransaction(tx: Record<string, JsonValue>): Promise<PutResult> {
    return this.request("PUT", "/transaction", undefined, tx);
  }

  userHistory(userId: string): Promise<RecordWire[]> {
    return this.request("GET", `/users/${userId}`);
  }

  users(): Promise<RecordWire[]> {
    return this.request("GET", "/users");
  }

  userState(userId: string): Promise<StateWire> {
    return this.request("GET", `/state/users/${userId}`);
  }

  userStates(): Promise<StateWire[]> {
    return this.request("GET", "/state/users");
  }

  contextHistory(contextId: string): Promise<RecordWire[]> {
    return this.request("GET", `/contexts/${contextId}`);
  }

  contexts(): Promise<RecordWire[]> {
    return this.request("GET", "/contexts");
  }

  contextState(contextId: string): Promise<StateWire> {
    return this.request("GET", `/state/contexts/${contextId}`);
  }

  contextStates(): Promise<StateWire[]> {
    return this.request("GET", "/state/contexts");
  }

  transaction(transactionId: string): Promise<RecordWire> {
    return this.request("GET", `/transactions/${transactionId}`);
  }

  transactionsByAsset(assetId: string): Promise<RecordWire[]> {
    return this.request("GET", "/transactions", { asset_id: assetId });
  }

  transactionsByContext(contextId: string): Promise<RecordWire[]> {
    return this.request("GET", "/transactions", { context_id: contextId });
  }

  transactionsByParent(parentId: string): Promise<RecordWire[]> {
    return this.request("GET", "/transactions", { parent_id: parentId });
  }

  transactionState(assetId: string): Promise<StateWire> {
    return this.request("GET", "/state/transactions", { asset_id: assetId });
  }

  transactionStatesByContext(contextId: string): Promise<StateWire[]> {
    return this.request("GET", "/state/transactions", { context_id: contextId });
  }

  transactionStatesByParent(parentId: string): Promise<StateWire[]> {
    return this.request("GET", "/state/transactions", { parent_id: parentId });
  }

  search(text: string): Promise<StateWire[]> {
    return this.request("GET", "/state/transactions/search", { text });
  }
}
