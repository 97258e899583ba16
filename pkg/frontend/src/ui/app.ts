// Application shell: gateway URL, wallet session, tabbed screens.

import { GatewayApi } from "../api";
import { LocalWallet } from "../wallet";
import { clear, el } from "./dom";
import { contextsScreen } from "./contextsScreen";
import { explorerScreen } from "./explorerScreen";
import { signoffScreen } from "./signoffScreen";
import { walletScreen } from "./walletScreen";
import { KeyValueStore } from "../wallet";

export interface AppContext {
  api: GatewayApi;
  wallet: LocalWallet | null;
  storage: KeyValueStore;
  setWallet(wallet: LocalWallet): void;
}

const SCREENS: Record<string, (ctx: AppContext) => HTMLElement> = {
  wallet: walletScreen,
  contexts: contextsScreen,
  "sign-off": signoffScreen,
  explorer: explorerScreen,
};

export function mountApp(
  root: HTMLElement,
  options: { storage: KeyValueStore; baseUrl?: string },
): AppContext {
  const storedUrl = options.storage.getItem("ledgergate.gateway_url");
  const ctx: AppContext = {
    api: new GatewayApi(options.baseUrl ?? storedUrl ?? "http://127.0.0.1:8080"),
    wallet: null,
    storage: options.storage,
    setWallet(wallet: LocalWallet) {
      ctx.wallet = wallet;
      renderHeaderState();
    },
  };

  const urlInput = el("input", { name: "gateway-url", value: ctx.api.baseUrl });
  const walletBadge = el("span", { class: "wallet-badge" });
  const main = el("main", { class: "screen-host" });

  function renderHeaderState(): void {
    walletBadge.textContent = ctx.wallet ? `wallet: ${ctx.wallet.label}` : "no wallet";
  }

  function show(screen: string): void {
    clear(main);
    main.append(SCREENS[screen](ctx));
  }

  urlInput.addEventListener("change", () => {
    ctx.api = new GatewayApi(urlInput.value);
    options.storage.setItem("ledgergate.gateway_url", urlInput.value);
  });

  const nav = el(
    "nav",
    {},
    ...Object.keys(SCREENS).map((name) =>
      el("button", { name: `tab-${name}`, onclick: () => show(name) }, name),
    ),
  );

  root.append(
    el("header", {}, el("h1", {}, "ledgergate console"), el("label", {}, "gateway "), urlInput, walletBadge),
    nav,
    main,
  );
  renderHeaderState();
  show("wallet");
  return ctx;
}

declare global {
  interface Window {
    __LEDGERGATE_TEST__?: boolean;
  }
}

// browser entry point; tests mount explicitly
if (typeof document !== "undefined" && !window.__LEDGERGATE_TEST__) {
  const root = document.getElementById("app");
  if (root) {
    mountApp(root, { storage: window.localStorage });
  }
}
