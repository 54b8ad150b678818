import { createApiClient } from "./api.js";
import { createSampleFlow } from "./requests.js";
import { createStore } from "./store.js";
import { createView } from "./view.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const store = createStore();
const api = createApiClient(window.fetch.bind(window));
const flow = createSampleFlow(store, api);
createView(root, store, flow);

// starter document so the first Sample click works immediately
store.dispatch({ kind: "add_box", text: "Grand Opening", cx: 300, cy: 150 });
store.dispatch({ kind: "add_box", text: "Saturday March 7", cx: 300, cy: 380 });
store.dispatch({ kind: "add_box", text: "128 Mill Road", cx: 300, cy: 640 });

api
  .meta()
  .then((meta) => store.dispatch({ kind: "meta_received", meta }))
  .catch((err) => {
    store.dispatch({
      kind: "boot_failed",
      message: `service unavailable: ${err instanceof Error ? err.message : err}`,
    });
  });
