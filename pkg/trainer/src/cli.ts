/**
 * Trainer command line.
 *
 *   train   --tasks tasks.csv --cf-dir cf/ --out checkpoint.json
 *   predict --checkpoint checkpoint.json --tasks tasks.csv --out-dir preds/
 *
 * Training consumes engine artifacts (maps referenced by the task CSV plus
 * CFM1 supervision from compute-cf); prediction emits CFM1 files and a
 * timing CSV for the engine's solve/report commands.
 */

import * as path from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadDataset, loadPredictSamples } from "./data.js";
import { CfModel, defaultConfig } from "./model.js";
import { predictToFiles } from "./predict.js";
import { buildManifest, defaultTrainConfig, train, writeCurve } from "./train.js";

export async function runCli(argv: string[]): Promise<void> {
  await yargs(argv)
    .command(
      "train",
      "Train the correction-factor predictor on engine supervision",
      (y) =>
        y
          .option("tasks", { type: "string", demandOption: true })
          .option("cf-dir", { type: "string", demandOption: true })
          .option("out", { type: "string", demandOption: true })
          .option("epochs", { type: "number", default: 20 })
          .option("batch-size", { type: "number", default: 32 })
          .option("peak-lr", { type: "number", default: 8e-3 })
          .option("seed", { type: "number", default: 0 })
          .option("no-masking", { type: "boolean", default: false })
          .option("no-skips", { type: "boolean", default: false }),
      (args) => {
        const samples = loadDataset(args.tasks, args["cf-dir"]);
        const modelConfig = {
          ...defaultConfig(samples[0].width, args.seed),
          longSkips: !args["no-skips"],
        };
        const trainConfig = defaultTrainConfig({
          epochs: args.epochs,
          batchSize: args["batch-size"],
          peakLearningRate: args["peak-lr"],
          maskingEnabled: !args["no-masking"],
          seed: args.seed,
        });
        const { model, losses } = train(samples, modelConfig, trainConfig, (step, loss) => {
          if (step % 10 === 0) console.log(`step ${step} loss ${loss.toFixed(6)}`);
        });
        model.save(args.out, buildManifest(modelConfig, trainConfig, { samples: samples.length }));
        writeCurve(losses, path.join(path.dirname(args.out), "training_curve.csv"));
        console.log(`checkpoint written to ${args.out}`);
      },
    )
    .command(
      "predict",
      "Emit CFM1 prediction files for every task",
      (y) =>
        y
          .option("checkpoint", { type: "string", demandOption: true })
          .option("tasks", { type: "string", demandOption: true })
          .option("out-dir", { type: "string", demandOption: true })
          .option("batch-size", { type: "number", default: 32 })
          .option("allow-cross-size", { type: "boolean", default: false }),
      (args) => {
        const { model } = CfModel.load(args.checkpoint);
        const samples = loadPredictSamples(args.tasks);
        predictToFiles(model, samples, args["out-dir"], {
          batchSize: args["batch-size"],
          allowCrossSize: args["allow-cross-size"],
        });
        console.log(`wrote ${samples.length} CF files to ${args["out-dir"]}`);
      },
    )
    .demandCommand(1)
    .strict()
    .parseAsync();
}

const invokedDirectly =
  process.argv[1] && path.resolve(process.argv[1]) === new URL(import.meta.url).pathname;
if (invokedDirectly) {
  runCli(hideBin(process.argv)).catch((err) => {
    console.error(err.message ?? err);
    process.exit(1);
  });
}
