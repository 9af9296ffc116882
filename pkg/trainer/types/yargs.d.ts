// Minimal declarations for the globally installed yargs (no bundled types).
declare module "yargs" {
  interface Argv {
    command(
      name: string,
      description: string,
      builder: (y: Argv) => Argv,
      handler: (args: Record<string, any>) => void,
    ): Argv;
    option(name: string, config: Record<string, unknown>): Argv;
    demandOption(name: string): Argv;
    demandCommand(n: number): Argv;
    strict(): Argv;
    parseAsync(): Promise<unknown>;
  }
  function yargs(argv: string[]): Argv;
  export default yargs;
}

declare module "yargs/helpers" {
  export function hideBin(argv: string[]): string[];
}
