import { ApiClient } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8080";
const annotator = params.get("annotator") ?? "anonymous";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const api = new ApiClient(baseUrl);

  const picker = document.getElementById("movie-picker") as HTMLSelectElement | null;
  const movies = await api.listMovies();
  if (!movies.body || movies.body.length === 0) {
    root.textContent = movies.body
      ? "The service has no movies loaded."
      : `Cannot reach the annotation service at ${baseUrl}.`;
    return;
  }
  let current: App | null = null;
  const open = async (movieId: string): Promise<void> => {
    current?.destroy();
    current = await App.create(root, api, movieId, annotator);
  };
  if (picker) {
    for (const movie of movies.body) {
      const option = document.createElement("option");
      option.value = movie.movie_id;
      option.textContent =
        `${movie.movie_id} (${Math.round(movie.progress * 100)}% done)`;
      picker.appendChild(option);
    }
    picker.addEventListener("change", () => {
      void open(picker.value);
    });
  }
  const movieId = params.get("movie") ?? movies.body[0].movie_id;
  if (picker) picker.value = movieId;
  await open(movieId);
}

void boot();
