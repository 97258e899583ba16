// Client-side signing primitives, mirroring the gateway's conventions:
// Ed25519 over the SHA3-256 digest of the canonical body; transaction id is
// SHA3-256 of canonical body bytes concatenated with the raw signature.

import nacl from "tweetnacl";
import { sha3_256 } from "js-sha3";

import { JsonValue, canonicalize } from "./canonical";

const B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";
const B58_INDEX = new Map([...B58_ALPHABET].map((ch, i) => [ch, BigInt(i)]));
const SIGNATURE_RE = /^[0-9a-f]{128}$/;

export class MalformedKeyError extends Error {}
export class MalformedSignatureError extends Error {}
export class InvalidCharacterError extends Error {}

export interface KeyPair {
  seed: Uint8Array; // 32 bytes, never serialized to the ledger
  publicKey: Uint8Array;
  secretKey: Uint8Array; // tweetnacl's 64-byte expanded form
}

export function keyPairFromSeed(seed: Uint8Array): KeyPair {
  if (seed.length !== 32) {
    throw new MalformedKeyError(`seed must be 32 bytes, got ${seed.length}`);
  }
  const pair = nacl.sign.keyPair.fromSeed(seed);
  return { seed, publicKey: pair.publicKey, secretKey: pair.secretKey };
}

export function generateKeyPair(): KeyPair {
  return keyPairFromSeed(nacl.randomBytes(32));
}

export function bytesToHex(bytes: Uint8Array): string {
  return [...bytes].map((b) => b.toString(16).padStart(2, "0")).join("");
}

export function hexToBytes(hex: string): Uint8Array {
  if (hex.length % 2 !== 0 || !/^[0-9a-f]*$/.test(hex)) {
    throw new Error(`not lowercase hex: ${hex.slice(0, 16)}...`);
  }
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function sha3Hex(data: Uint8Array): string {
  return sha3_256(data);
}

export function sha3Bytes(data: Uint8Array): Uint8Array {
  return new Uint8Array(sha3_256.arrayBuffer(data));
}

export function base58Encode(raw: Uint8Array): string {
  if (raw.length === 0) return "";
  let zeros = 0;
  while (zeros < raw.length && raw[zeros] === 0) zeros++;
  let num = BigInt("0x" + (bytesToHex(raw) || "0"));
  let encoded = "";
  while (num > 0n) {
    const rem = num % 58n;
    num /= 58n;
    encoded = B58_ALPHABET[Number(rem)] + encoded;
  }
  return "1".repeat(zeros) + encoded;
}

export function base58Decode(text: string): Uint8Array {
  let num = 0n;
  for (const ch of text) {
    const idx = B58_INDEX.get(ch);
    if (idx === undefined) {
      throw new InvalidCharacterError(`not a base58 character: ${JSON.stringify(ch)}`);
    }
    num = num * 58n + idx;
  }
  let zeros = 0;
  while (zeros < text.length && text[zeros] === "1") zeros++;
  let hex = num.toString(16);
  if (hex === "0") hex = "";
  if (hex.length % 2) hex = "0" + hex;
  const body = hexToBytes(hex);
  const out = new Uint8Array(zeros + body.length);
  out.set(body, zeros);
  return out;
}

export function publicKeyB58(pair: KeyPair): string {
  return base58Encode(pair.publicKey);
}

export function decodePublicKey(b58: string): Uint8Array {
  let raw: Uint8Array;
  try {
    raw = base58Decode(b58);
  } catch (err) {
    throw new MalformedKeyError(String(err));
  }
  if (raw.length !== 32) {
    throw new MalformedKeyError(`public key decodes to ${raw.length} bytes, expected 32`);
  }
  return raw;
}

export function signBody(body: Uint8Array, pair: KeyPair): string {
  return bytesToHex(nacl.sign.detached(sha3Bytes(body), pair.secretKey));
}

export function verifyBody(body: Uint8Array, signatureHex: string, publicKey: string): boolean {
  if (!SIGNATURE_RE.test(signatureHex)) {
    throw new MalformedSignatureError("signature must be 128 lowercase hex chars");
  }
  const raw = decodePublicKey(publicKey);
  return nacl.sign.detached.verify(sha3Bytes(body), hexToBytes(signatureHex), raw);
}

// fields assigned at commit or derived from the signature; never signed
const COMMIT_ASSIGNED = new Set(["id", "signature", "timestamp"]);

export function signedBody(tx: Record<string, JsonValue>): Record<string, JsonValue> {
  const body: Record<string, JsonValue> = {};
  for (const [key, value] of Object.entries(tx)) {
    if (!COMMIT_ASSIGNED.has(key)) body[key] = value;
  }
  return body;
}

export function signTransaction(tx: Record<string, JsonValue>, pair: KeyPair): Record<string, JsonValue> {
  const signature = signBody(canonicalize(signedBody(tx)), pair);
  return { ...tx, signature };
}

export function deriveId(signedTx: Record<string, JsonValue>): string {
  const signature = signedTx["signature"];
  if (typeof signature !== "string" || !SIGNATURE_RE.test(signature)) {
    throw new MalformedSignatureError("transaction carries no 128-lowercase-hex signature");
  }
  const body = canonicalize(signedBody(signedTx));
  const sigBytes = hexToBytes(signature);
  const joined = new Uint8Array(body.length + sigBytes.length);
  joined.set(body, 0);
  joined.set(sigBytes, body.length);
  return sha3Hex(joined);
}
