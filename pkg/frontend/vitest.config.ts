import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The contract test shells out to the analysis CLI.
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
