"use strict";
/**
 * Extension entry point. Deliberately thin: every piece of language
 * knowledge (parsing, validation, completion data) lives in the external
 * `medford` server; this file only registers the filetype and wires the
 * language client to `medford lsp` over stdio.
 */
var __createBinding = (this && this.__createBinding) || (Object.create ? (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    var desc = Object.getOwnPropertyDescriptor(m, k);
    if (!desc || ("get" in desc ? !m.__esModule : desc.writable || desc.configurable)) {
      desc = { enumerable: true, get: function() { return m[k]; } };
    }
    Object.defineProperty(o, k2, desc);
}) : (function(o, m, k, k2) {
    if (k2 === undefined) k2 = k;
    o[k2] = m[k];
}));
var __setModuleDefault = (this && this.__setModuleDefault) || (Object.create ? (function(o, v) {
    Object.defineProperty(o, "default", { enumerable: true, value: v });
}) : function(o, v) {
    o["default"] = v;
});
var __importStar = (this && this.__importStar) || (function () {
    var ownKeys = function(o) {
        ownKeys = Object.getOwnPropertyNames || function (o) {
            var ar = [];
            for (var k in o) if (Object.prototype.hasOwnProperty.call(o, k)) ar[ar.length] = k;
            return ar;
        };
        return ownKeys(o);
    };
    return function (mod) {
        if (mod && mod.__esModule) return mod;
        var result = {};
        if (mod != null) for (var k = ownKeys(mod), i = 0; i < k.length; i++) if (k[i] !== "default") __createBinding(result, mod, k[i]);
        __setModuleDefault(result, mod);
        return result;
    };
})();
Object.defineProperty(exports, "__esModule", { value: true });
exports.activate = activate;
exports.deactivate = deactivate;
const vscode = __importStar(require("vscode"));
const node_1 = require("vscode-languageclient/node");
const serverPath_1 = require("./serverPath");
let client;
async function activate(context) {
    const configured = vscode.workspace.getConfiguration("medford").get("serverPath");
    const discovery = (0, serverPath_1.discoverServer)({
        configured,
        envPath: process.env.PATH,
        bundledDir: context.asAbsolutePath("server"),
    });
    if (discovery.command === null) {
        void vscode.window.showErrorMessage("MEDFORD language server not found. Searched: " +
            discovery.searched.join(", ") +
            '. Install the medford tool or set "medford.serverPath".');
        return;
    }
    const serverOptions = {
        command: discovery.command,
        args: ["lsp"],
    };
    const clientOptions = {
        documentSelector: [{ language: "medford" }],
        diagnosticCollectionName: "medford",
    };
    client = new node_1.LanguageClient("medford", "MEDFORD Language Server", serverOptions, clientOptions);
    await client.start();
    context.subscriptions.push(client);
}
async function deactivate() {
    await client?.stop();
    client = undefined;
}
//# sourceMappingURL=extension.js.map