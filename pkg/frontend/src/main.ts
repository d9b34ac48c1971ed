import { mount } from "./app.js";

// Served from the service itself (/ui) the API is same-origin; override
// with e.g. <body data-api="http://127.0.0.1:8080"> when hosted elsewhere.
const baseUrl = document.body.dataset.api ?? "";
mount(document.getElementById("app")!, baseUrl);
