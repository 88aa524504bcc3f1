/**
 * End-to-end check through the extension's own external interfaces: the
 * server binary discovered the same way activation discovers it, spoken
 * to over stdio exactly as vscode-languageclient would, must surface the
 * same diagnostics the CLI prints for identical bytes.
 */

import { ChildProcess, execFileSync, spawn } from "child_process";
import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import * as path from "path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { discoverServer } from "../src/serverPath";

interface Message {
    id?: number;
    method?: string;
    params?: any;
    result?: any;
    error?: any;
}

class StdioClient {
    private proc: ChildProcess;
    private buffer = Buffer.alloc(0);
    private queue: Message[] = [];
    private waiters: ((m: Message) => void)[] = [];
    private nextId = 0;

    constructor(command: string, args: string[]) {
        this.proc = spawn(command, args, { stdio: ["pipe", "pipe", "pipe"] });
        this.proc.stdout!.on("data", (chunk: Buffer) => {
            this.buffer = Buffer.concat([this.buffer, chunk]);
            this.drain();
        });
    }

    private drain(): void {
        for (;;) {
            const headerEnd = this.buffer.indexOf("\r\n\r\n");
            if (headerEnd < 0) return;
            const header = this.buffer.subarray(0, headerEnd).toString("ascii");
            const match = /Content-Length: (\d+)/i.exec(header);
            if (!match) throw new Error(`bad header: ${header}`);
            const length = parseInt(match[1], 10);
            const bodyStart = headerEnd + 4;
            if (this.buffer.length < bodyStart + length) return;
            const body = this.buffer.subarray(bodyStart, bodyStart + length).toString("utf8");
            this.buffer = this.buffer.subarray(bodyStart + length);
            const message = JSON.parse(body) as Message;
            const waiter = this.waiters.shift();
            if (waiter) waiter(message);
            else this.queue.push(message);
        }
    }

    read(timeoutMs = 5000): Promise<Message> {
        const queued = this.queue.shift();
        if (queued) return Promise.resolve(queued);
        return new Promise((resolve, reject) => {
            const timer = setTimeout(() => reject(new Error("timed out waiting for message")), timeoutMs);
            this.waiters.push((message) => {
                clearTimeout(timer);
                resolve(message);
            });
        });
    }

    async readUntil(predicate: (m: Message) => boolean): Promise<Message> {
        for (;;) {
            const message = await this.read();
            if (predicate(message)) return message;
        }
    }

    send(method: string, params: object, notification = false): number | undefined {
        const message: Message = { method, params };
        (message as any).jsonrpc = "2.0";
        if (!notification) message.id = ++this.nextId;
        const body = Buffer.from(JSON.stringify(message), "utf8");
        this.proc.stdin!.write(`Content-Length: ${body.length}\r\n\r\n`);
        this.proc.stdin!.write(body);
        return message.id;
    }

    async request(method: string, params: object): Promise<Message> {
        const id = this.send(method, params);
        return this.readUntil((m) => m.id === id);
    }

    exitCode(timeoutMs = 5000): Promise<number | null> {
        return new Promise((resolve, reject) => {
            const timer = setTimeout(() => reject(new Error("server did not exit")), timeoutMs);
            this.proc.on("exit", (code) => {
                clearTimeout(timer);
                resolve(code);
            });
        });
    }

    kill(): void {
        if (this.proc.exitCode === null) this.proc.kill();
    }
}

const BAD_TEXT = "@Species P.Acuta\n\n@Species P.Acuta\n";
const FIXED_TEXT = "@Species P.Acuta\n\n@Photo P.Acuta\n";

describe("language client wiring", () => {
    let command: string;
    let client: StdioClient;
    let workDir: string;

    beforeAll(() => {
        const discovery = discoverServer({ envPath: process.env.PATH });
        if (discovery.command === null) {
            throw new Error("medford binary not on PATH; install the server package first");
        }
        command = discovery.command;
        workDir = mkdtempSync(path.join(tmpdir(), "medford-ext-"));
    });

    afterAll(() => {
        client?.kill();
    });

    it("surfaces the same diagnostics the CLI reports, then shuts down cleanly", async () => {
        const file = path.join(workDir, "sample.mfd");
        writeFileSync(file, BAD_TEXT);
        const uri = `file://${file}`;

        client = new StdioClient(command, ["lsp"]);
        const init = await client.request("initialize", { initializationOptions: {} });
        expect(init.result.capabilities.documentSymbolProvider).toBe(true);
        client.send("initialized", {}, true);

        client.send(
            "textDocument/didOpen",
            { textDocument: { uri, languageId: "medford", version: 1, text: BAD_TEXT } },
            true
        );
        const published = await client.readUntil(
            (m) => m.method === "textDocument/publishDiagnostics" && m.params.uri === uri
        );
        const lspDiags = new Set(
            published.params.diagnostics.map(
                (d: any) =>
                    `${d.code}:${d.range.start.line + 1}:${d.range.start.character + 1}:` +
                    `${d.severity === 1 ? "error" : "warning"}:${d.message}`
            )
        );

        let cliOut = "";
        try {
            execFileSync(command, ["validate", "--format", "json", file]);
        } catch (err: any) {
            expect(err.status).toBe(1); // errors present: exit 1 by contract
            cliOut = err.stdout.toString("utf8");
        }
        const cliDiags = new Set(
            cliOut
                .trim()
                .split("\n")
                .map((line) => JSON.parse(line))
                .map((d: any) => `${d.code}:${d.line}:${d.col}:${d.severity}:${d.message}`)
        );
        expect(lspDiags).toEqual(cliDiags);
        expect(lspDiags.size).toBe(1);
        expect([...lspDiags][0]).toContain("E-DUPLICATE-NAME");

        client.send(
            "textDocument/didChange",
            { textDocument: { uri, version: 2 }, contentChanges: [{ text: FIXED_TEXT }] },
            true
        );
        const cleared = await client.readUntil(
            (m) => m.method === "textDocument/publishDiagnostics" && m.params.version === 2
        );
        expect(cleared.params.diagnostics).toEqual([]);

        await client.request("shutdown", {});
        client.send("exit", {}, true);
        expect(await client.exitCode()).toBe(0);
    }, 15000);
});
