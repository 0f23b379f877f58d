#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { exportLogits } from './export';
import { trainCnn } from './train';

yargs(hideBin(process.argv))
  .command(
    'train',
    'train the CNN on a manifest of grayscale images',
    (y) =>
      y
        .option('manifest-train', { type: 'string', demandOption: true })
        .option('manifest-val', { type: 'string' })
        .option('model', { type: 'string', demandOption: true, describe: 'output model JSON' })
        .option('epochs', { type: 'number', default: 60 })
        .option('batch', { type: 'number', default: 64 })
        .option('lr', { type: 'number', default: 3e-4 })
        .option('dropout', { type: 'number', default: 0.25 })
        .option('image-size', { type: 'number', default: 256 })
        .option('channels', { type: 'number', choices: [1, 3], default: 1 })
        .option('seed', { type: 'number', default: 0 }),
    async (argv) => {
      const log = await trainCnn(
        {
          manifestTrain: argv['manifest-train'],
          manifestVal: argv['manifest-val'],
          epochs: argv.epochs,
          batchSize: argv.batch,
          learningRate: argv.lr,
          dropout: argv.dropout,
          imageSize: argv['image-size'],
          channels: argv.channels as 1 | 3,
          seed: argv.seed,
        },
        argv.model
      );
      const last = log[log.length - 1];
      if (last) console.log(`done: final val_accuracy=${last.valAccuracy.toPrecision(9)}`);
    }
  )
  .command(
    'export',
    'write raw logits for every manifest entry as CSV',
    (y) =>
      y
        .option('model', { type: 'string', demandOption: true })
        .option('manifest', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true }),
    (argv) => {
      const result = exportLogits(argv.model, argv.manifest, argv.out);
      console.log(`rows=${result.rows}`);
      console.log(`accuracy=${result.accuracy}`);
    }
  )
  .demandCommand(1)
  .strict()
  .fail((msg, err) => {
    console.error(err ? `error: ${err.message}` : msg);
    process.exit(2);
  })
  .parse();
