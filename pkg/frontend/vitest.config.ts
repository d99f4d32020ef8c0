import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // the integration suite spawns the Python review server
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
