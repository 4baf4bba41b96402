// Spawns a live backend for the conformance tests.  The UI consumes the core
// exclusively through its HTTP API, so the tests do too.

import { spawn, type ChildProcess } from 'node:child_process';

const PORT = 8731;
export const BASE_URL = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;

async function waitForReady(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE_URL}/v1/profile`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error(`backend did not become ready on ${BASE_URL}`);
}

export default async function setup(): Promise<() => Promise<void>> {
  if (process.env.SKIP_BACKEND) {
    return async () => undefined;
  }
  server = spawn('wirebend', ['serve', '--listen', `127.0.0.1:${PORT}`], {
    stdio: 'ignore',
  });
  server.on('error', (err) => {
    console.error('failed to launch backend:', err);
  });
  await waitForReady(30000);
  process.env.WIREBEND_API = BASE_URL;
  return async () => {
    server?.kill('SIGTERM');
    await new Promise((r) => setTimeout(r, 200));
  };
}
