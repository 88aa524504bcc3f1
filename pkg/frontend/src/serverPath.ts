/**
 * Discovery of the `medford` executable. Kept free of any vscode imports
 * so it can be unit-tested outside the editor host.
 *
 * Search order: explicit setting, then every PATH directory, then the
 * extension's bundled server directory.
 */

import * as fs from "fs";
import * as path from "path";

export interface DiscoveryOptions {
    /** Value of the medford.serverPath setting ("" or undefined when unset). */
    configured?: string;
    /** Value of process.env.PATH. */
    envPath?: string;
    /** Directory inside the installed extension that may carry a server. */
    bundledDir?: string;
    platform?: NodeJS.Platform;
    exists?: (candidate: string) => boolean;
}

export interface Discovery {
    /** Absolute path or bare command of the server binary, if any was found. */
    command: string | null;
    origin: "setting" | "path" | "bundled" | null;
    /** Every location that was considered, for the error notification. */
    searched: string[];
}

function binaryName(platform: NodeJS.Platform): string {
    return platform === "win32" ? "medford.exe" : "medford";
}

export function discoverServer(options: DiscoveryOptions = {}): Discovery {
    const platform = options.platform ?? process.platform;
    const exists = options.exists ?? ((candidate: string) => fs.existsSync(candidate));
    const searched: string[] = [];

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
