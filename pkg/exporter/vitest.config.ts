import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    // CNN training on the pure-JS backend takes tens of seconds
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
