import { defineConfig } from "vite";

// The UI fetches same-origin /api paths; in dev, proxy them to the training
// service (novapipe serve, default port 8000).
export default defineConfig({
  server: {
    proxy: {
      "/api": `http://127.0.0.1:${process.env.NOVAPIPE_PORT ?? "8000"}`,
    },
  },
});
