// Recording fetch fake: every request lands in `log`; responses are served
// from route handlers registered per (method, path prefix).

import type { FetchLike } from "../src/api.js";

export interface LoggedRequest {
  url: string;
  method: string;
  body: unknown;
}

type Handler = (request: LoggedRequest) => { status?: number; payload: unknown };

export class FakeHttp {
  log: LoggedRequest[] = [];
  private handlers: { method: string; prefix: string; handler: Handler }[] = [];

  on(method: string, prefix: string, handler: Handler): this {
    this.handlers.push({ method, prefix, handler });
    return this;
  }

  fetch: FetchLike = async (url, init) => {
    const request: LoggedRequest = {
      url,
      method: init?.method ?? "GET",
      body: init?.body ? JSON.parse(init.body) : undefined,
    };
    this.log.push(request);
    const match = this.handlers.find(
      (h) => h.method === request.method && url.startsWith(h.prefix),
    );
    if (!match) {
      return { ok: false, status: 404, json: async () => ({ detail: `no route ${url}` }) };
    }
    const { status = 200, payload } = match.handler(request);
    return { ok: status < 400, status, json: async () => payload };
  };
}

export class MemoryStorage {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}
