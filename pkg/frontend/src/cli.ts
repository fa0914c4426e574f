import { readFileSync } from "fs";
import { CsvError } from "./csv.js";
import { DEFAULT_SPEC, PlotSpec, render } from "./plot.js";

const USAGE = `usage: plot [--spec FILE] [CSV ...] [options]
  --spec FILE       read a key = value spec file (csv lines repeat)
  --x-col NAME      x column (default n)
  --y-col NAME      y column (default mean)
  --bound-col NAME  bound column drawn as a line (default bound, '' disables)
  --log-log         log-log axes (default)
  --linear          linear axes
  --x-label TEXT    x axis label
  --y-label TEXT    y axis label
  --out FILE        output SVG path (required)`;

export class UsageError extends Error {}

function parseSpecFile(path: string): Partial<PlotSpec> {
  const out: Partial<PlotSpec> = { csvPaths: [] };
  const text = readFileSync(path, "utf8");
  for (const rawLine of text.split("\n")) {
    const line = rawLine.split("#", 1)[0].trim();
    if (!line) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new UsageError(`${path}: expected 'key = value' but got '${line}'`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim();
    switch (key) {
      case "csv":
        out.csvPaths!.push(value);
        break;
      case "x-col":
        out.xCol = value;
        break;
      case "y-col":
        out.yCol = value;
        break;
      case "bound-col":
        out.boundCol = value === "" ? null : value;
        break;
      case "log-log":
        out.logLog = ["1", "true", "yes"].includes(value.toLowerCase());
        break;
      case "x-label":
        out.xLabel = value;
        break;
      case "y-label":
        out.yLabel = value;
        break;
      case "out":
        out.out = value;
        break;
      default:
        throw new UsageError(`${path}: unknown spec key '${key}'`);
    }
  }
  return out;
}

export function parseArgs(argv: string[]): PlotSpec {
  let fromFile: Partial<PlotSpec> = {};
  const flags: Partial<PlotSpec> = {};
  const positional: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new UsageError(`${a} needs a value`);
      return argv[++i];
    };
    if (a === "--spec") fromFile = parseSpecFile(next());
    else if (a === "--x-col") flags.xCol = next();
    else if (a === "--y-col") flags.yCol = next();
    else if (a === "--bound-col") {
      const v = next();
      flags.boundCol = v === "" ? null : v;
    } else if (a === "--log-log") flags.logLog = true;
    else if (a === "--linear") flags.logLog = false;
    else if (a === "--x-label") flags.xLabel = next();
    else if (a === "--y-label") flags.yLabel = next();
    else if (a === "--out") flags.out = next();
    else if (a === "--help" || a === "-h") throw new UsageError(USAGE);
    else if (a.startsWith("--")) throw new UsageError(`unknown flag ${a}\n${USAGE}`);
    else positional.push(a);
  }
  const csvPaths = [...(fromFile.csvPaths ?? []), ...positional];
  const spec: PlotSpec = {
    ...DEFAULT_SPEC,
    ...fromFile,
    ...flags,
    csvPaths,
    out: flags.out ?? fromFile.out ?? "",
  };
  if (spec.csvPaths.length === 0) throw new UsageError(`no input CSVs given\n${USAGE}`);
  if (!spec.out) throw new UsageError(`--out FILE is required\n${USAGE}`);
  return spec;
}

export function main(argv: string[]): number {
  try {
    render(parseArgs(argv));
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(err.message);
      return 2;
    }
    if (err instanceof CsvError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
