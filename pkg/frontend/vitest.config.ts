import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globalSetup: ["./test/global-setup.ts"],
    environment: "node",
    testTimeout: 20000,
    hookTimeout: 60000,
  },
});
