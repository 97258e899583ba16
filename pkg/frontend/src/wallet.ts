// Local key custody. The Ed25519 seed lives only in browser-local storage,
// encrypted under a passphrase (PBKDF2 -> AES-GCM via WebCrypto); signing
// happens in this process and the seed never leaves the client.

import { JsonValue } from "./canonical";
import { KeyPair, generateKeyPair, keyPairFromSeed, publicKeyB58, signTransaction, bytesToHex, hexToBytes } from "./crypto";

const STORAGE_PREFIX = "ledgergate.wallet.";
const PBKDF2_ITERATIONS = 250_000;

export class WalletError extends Error {}
export class WrongPassphraseError extends WalletError {}

// subset of DOM Storage, so tests can inject a plain map
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

interface StoredWallet {
  label: string;
  salt_hex: string;
  iv_hex: string;
  cipher_hex: string;
  public_key_b58: string;
  user_id?: string;
}

async function deriveAesKey(passphrase: string, salt: Uint8Array): Promise<CryptoKey> {
  const material = await crypto.subtle.importKey(
    "raw", new TextEncoder().encode(passphrase), "PBKDF2", false, ["deriveKey"],
  );
  return crypto.subtle.deriveKey(
    { name: "PBKDF2", salt: salt as BufferSource, iterations: PBKDF2_ITERATIONS, hash: "SHA-256" },
    material,
    { name: "AES-GCM", length: 256 },
    false,
    ["encrypt", "decrypt"],
  );
}

export class LocalWallet {
  private constructor(
    public readonly label: string,
    private readonly keyPair: KeyPair,
    private readonly store: KeyValueStore,
    public userId: string | undefined,
  ) {}

  static async create(
    label: string,
    passphrase: string,
    store: KeyValueStore,
    seed?: Uint8Array,
  ): Promise<LocalWallet> {
    if (store.getItem(STORAGE_PREFIX + label) !== null) {
      throw new WalletError(`wallet ${JSON.stringify(label)} already exists`);
    }
    const pair = seed ? keyPairFromSeed(seed) : generateKeyPair();
    const salt = crypto.getRandomValues(new Uint8Array(16));
    const iv = crypto.getRandomValues(new Uint8Array(12));
    const key = await deriveAesKey(passphrase, salt);
    const cipher = await crypto.subtle.encrypt(
      { name: "AES-GCM", iv: iv as BufferSource }, key, pair.seed as BufferSource,
    );
    const record: StoredWallet = {
      label,
      salt_hex: bytesToHex(salt),
      iv_hex: bytesToHex(iv),
      cipher_hex: bytesToHex(new Uint8Array(cipher)),
      public_key_b58: publicKeyB58(pair),
    };
    store.setItem(STORAGE_PREFIX + label, JSON.stringify(record));
    return new LocalWallet(label, pair, store, undefined);
  }

  static async unlock(label: string, passphrase: string, store: KeyValueStore): Promise<LocalWallet> {
    const raw = store.getItem(STORAGE_PREFIX + label);
    if (raw === null) {
      throw new WalletError(`no wallet ${JSON.stringify(label)}`);
    }
    const record = JSON.parse(raw) as StoredWallet;
    const key = await deriveAesKey(passphrase, hexToBytes(record.salt_hex));
    let seed: ArrayBuffer;
    try {
      seed = await crypto.subtle.decrypt(
        { name: "AES-GCM", iv: hexToBytes(record.iv_hex) as BufferSource },
        key,
        hexToBytes(record.cipher_hex) as BufferSource,
      );
    } catch {
      throw new WrongPassphraseError("passphrase does not unlock this wallet");
    }
    return new LocalWallet(label, keyPairFromSeed(new Uint8Array(seed)), store, record.user_id);
  }

  static labels(store: KeyValueStore, known: string[] = []): string[] {
    // DOM Storage is enumerable; injected stores pass candidates explicitly
    const labels: string[] = [];
    const domStore = store as unknown as Storage;
    if (typeof domStore.length === "number" && typeof domStore.key === "function") {
      for (let i = 0; i < domStore.length; i++) {
        const key = domStore.key(i);
        if (key && key.startsWith(STORAGE_PREFIX)) labels.push(key.slice(STORAGE_PREFIX.length));
      }
      return labels.sort();
    }
    return known.filter((label) => store.getItem(STORAGE_PREFIX + label) !== null);
  }

  get publicKey(): string {
    return publicKeyB58(this.keyPair);
  }

  setUserId(userId: string): void {
    this.userId = userId;
    const key = STORAGE_PREFIX + this.label;
    const record = JSON.parse(this.store.getItem(key)!) as StoredWallet;
    record.user_id = userId;
    this.store.setItem(key, JSON.stringify(record));
  }

  sign(tx: Record<string, JsonValue>): Record<string, JsonValue> {
    return signTransaction(tx, this.keyPair);
  }

  // for controllers that build transactions themselves
  get signer(): KeyPair {
    return this.keyPair;
  }
}
