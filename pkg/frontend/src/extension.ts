/**
 * Extension entry point. Deliberately thin: every piece of language
 * knowledge (parsing, validation, completion data) lives in the external
 * `medford` server; this file only registers the filetype and wires the
 * language client to `medford lsp` over stdio.
 */

import * as vscode from "vscode";
import {
    LanguageClient,
    LanguageClientOptions,
    ServerOptions,
} from "vscode-languageclient/node";

import { discoverServer } from "./serverPath";

let client: LanguageClient | undefined;

export async function activate(context: vscode.ExtensionContext): Promise<void> {
    const configured = vscode.workspace.getConfiguration("medford").get<string>("serverPath");
    const discovery = discoverServer({
        configured,
        envPath: process.env.PATH,
        bundledDir: context.asAbsolutePath("server"),
    });

    if (discovery.command === null) {
        void vscode.window.showErrorMessage(
            "MEDFORD language server not found. Searched: " +
                discovery.searched.join(", ") +
                '. Install the medford tool or set "medford.serverPath".'
        );
        return;
    }

    const serverOptions: ServerOptions = {
        command: discovery.command,
        args: ["lsp"],
    };
    const clientOptions: LanguageClientOptions = {
        documentSelector: [{ language: "medford" }],
        diagnosticCollectionName: "medford",
    };

    client = new LanguageClient("medford", "MEDFORD Language Server", serverOptions, clientOptions);
    await client.start();
    context.subscriptions.push(client);
}

export async function deactivate(): Promise<void> {
    await client?.stop();
    client = undefined;
}
