// Wallet screen: create/unlock a local wallet, register users (admin),
// link the wallet to its ledger user record.

import { ApiError } from "../api";
import { linkWalletUser, registerUser } from "../controller";
import { LocalWallet } from "../wallet";
import { AppContext } from "./app";
import { clear, el, errorBox } from "./dom";

export function walletScreen(ctx: AppContext): HTMLElement {
  const root = el("section", { class: "screen wallet-screen" });
  const status = el("div", { class: "wallet-status" });
  const feedback = el("div", { class: "feedback" });

  const labelInput = el("input", { name: "wallet-label", placeholder: "label" });
  const passInput = el("input", { name: "wallet-passphrase", type: "password", placeholder: "passphrase" });

  async function refresh(): Promise<void> {
    clear(status);
    if (ctx.wallet) {
      status.append(
        el("p", {}, `unlocked: ${ctx.wallet.label}`),
        el("p", { class: "mono" }, `public key: ${ctx.wallet.publicKey}`),
        el("p", { class: "mono" }, `user id: ${ctx.wallet.userId ?? "(not linked)"}`),
      );
    } else {
      const labels = LocalWallet.labels(ctx.storage);
      status.append(el("p", {}, labels.length ? `wallets: ${labels.join(", ")}` : "no wallets yet"));
    }
  }

  async function act(action: () => Promise<void>): Promise<void> {
    clear(feedback);
    try {
      await action();
    } catch (err) {
      feedback.append(errorBox(err instanceof ApiError ? `${err.stage}: ${err.detail}` : String(err)));
    }
    await refresh();
  }

  const createButton = el("button", {
    name: "wallet-create",
    onclick: () =>
      act(async () => {
        ctx.setWallet(await LocalWallet.create(labelInput.value, passInput.value, ctx.storage));
      }),
  }, "create wallet");

  const unlockButton = el("button", {
    name: "wallet-unlock",
    onclick: () =>
      act(async () => {
        ctx.setWallet(await LocalWallet.unlock(labelInput.value, passInput.value, ctx.storage));
      }),
  }, "unlock");

  const linkButton = el("button", {
    name: "wallet-link",
    onclick: () =>
      act(async () => {
        if (!ctx.wallet) throw new Error("unlock a wallet first");
        const userId = await linkWalletUser(ctx.api, ctx.wallet);
        if (!userId) throw new Error("no user record matches this wallet key");
      }),
  }, "link ledger user");

  const regName = el("input", { name: "register-username", placeholder: "username" });
  const regKey = el("input", { name: "register-key", placeholder: "base58 public key" });
  const registerButton = el("button", {
    name: "register-user",
    onclick: () =>
      act(async () => {
        if (!ctx.wallet) throw new Error("unlock an admin wallet first");
        const key = regKey.value.trim() || ctx.wallet.publicKey;
        await registerUser(ctx.api, ctx.wallet, regName.value.trim(), key);
      }),
  }, "register user (admin)");

  root.append(
    el("h2", {}, "Wallet"),
    status,
    el("div", { class: "row" }, labelInput, passInput, createButton, unlockButton, linkButton),
    el("div", { class: "row" }, regName, regKey, registerButton),
    feedback,
  );
  void refresh();
  return root;
}
