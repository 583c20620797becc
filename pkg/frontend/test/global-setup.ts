// Spawns the Python knowledge-navigator service once for the whole vitest
// run; e2e tests talk to it over real HTTP and inspect its telemetry file.
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, copyFileSync, writeFileSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

const DATA_DIR = resolve(__dirname, "..", "..", "src", "opnav", "data");
export const SERVER_INFO_PATH = join(__dirname, ".server.json");

function freePort(): Promise<number> {
  return new Promise((done, fail) => {
    const probe = createServer();
    probe.once("error", fail);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      const port = typeof address === "object" && address ? address.port : 0;
      probe.close(() => done(port));
    });
  });
}

async function waitForHealth(baseUrl: string, proc: ChildProcess): Promise<void> {
  for (let attempt = 0; attempt < 80; attempt++) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early with code ${proc.exitCode}`);
    }
    try {
      const response = await fetch(`${baseUrl}/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("service did not become healthy in time");
}

export default async function setup(): Promise<() => Promise<void>> {
  const workDir = mkdtempSync(join(tmpdir(), "opnav-console-"));
  const corpusPath = join(workDir, "corpus.xml");
  const synonymsPath = join(workDir, "synonyms.txt");
  const telemetryPath = join(workDir, "telemetry.jsonl");
  copyFileSync(join(DATA_DIR, "corpus.xml"), corpusPath);
  copyFileSync(join(DATA_DIR, "synonyms.txt"), synonymsPath);

  const port = await freePort();
  const configPath = join(workDir, "service.toml");
  writeFileSync(
    configPath,
    `[service]
corpus_path = "${corpusPath}"
synonyms_path = "${synonymsPath}"
telemetry_path = "${telemetryPath}"
host = "127.0.0.1"
port = ${port}
`,
  );

  const proc = spawn("opnav", ["serve", "--config", configPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  let stderr = "";
  proc.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  try {
    await waitForHealth(baseUrl, proc);
  } catch (err) {
    proc.kill();
    throw new Error(`${err}\nservice stderr:\n${stderr}`);
  }

  writeFileSync(
    SERVER_INFO_PATH,
    JSON.stringify({ baseUrl, telemetryPath, corpusPath, originalCorpus: join(DATA_DIR, "corpus.xml") }),
  );

  return async () => {
    proc.kill();
    await new Promise((r) => setTimeout(r, 200));
    rmSync(workDir, { recursive: true, force: true });
    rmSync(SERVER_INFO_PATH, { force: true });
  };
}
