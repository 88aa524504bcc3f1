"use strict";
/**
 * Discovery of the `medford` executable. Kept free of any vscode imports
 * so it can be unit-tested outside the editor host.
 *
 * Search order: explicit setting, then every PATH directory, then the
 * extension's bundled server directory.
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
exports.discoverServer = discoverServer;
const fs = __importStar(require("fs"));
const path = __importStar(require("path"));
function binaryName(platform) {
    return platform === "win32" ? "medford.exe" : "medford";
}
function discoverServer(options = {}) {
    const platform = options.platform ?? process.platform;
    const exists = options.exists ?? ((candidate) => fs.existsSync(candidate));
    const searched = [];
    if (options.configured && options.configured.trim() !== "") {
        const configured = options.configured.trim();
        searched.push(configured);
        if (exists(configured)) {
            return { command: configured, origin: "setting", searched };
        }
        // An explicit setting that does not exist is an error; do not fall
        // through to a different server than the one the user asked for.
        return { command: null, origin: null, searched };
    }
    const name = binaryName(platform);
    for (const dir of (options.envPath ?? "").split(path.delimiter).filter((d) => d !== "")) {
        const candidate = path.join(dir, name);
        searched.push(candidate);
        if (exists(candidate)) {
            return { command: candidate, origin: "path", searched };
        }
    }
    if (options.bundledDir) {
        const candidate = path.join(options.bundledDir, name);
        searched.push(candidate);
        if (exists(candidate)) {
            return { command: candidate, origin: "bundled", searched };
        }
    }
    return { command: null, origin: null, searched };
}
//# sourceMappingURL=serverPath.js.map