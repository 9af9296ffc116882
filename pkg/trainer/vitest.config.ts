import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 5_400_000,
    hookTimeout: 5_400_000,
    pool: "forks",
    fileParallelism: false,
  },
});
