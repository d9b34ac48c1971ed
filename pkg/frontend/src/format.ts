// Timestamp rendering. The service stores and ships UTC instants; the board
// shows them as DD/MM/YY HH:MM in UTC so every viewer reads the same clock.

export function formatStamp(iso: string): string {
  const date = new Date(iso);
  if (Number.isNaN(date.getTime())) return iso;
  const dd = pad(date.getUTCDate());
  const mm = pad(date.getUTCMonth() + 1);
  const yy = pad(date.getUTCFullYear() % 100);
  const hh = pad(date.getUTCHours());
  const min = pad(date.getUTCMinutes());
  return `${dd}/${mm}/${yy} ${hh}:${min}`;
}

function pad(value: number): string {
  return value.toString().padStart(2, "0");
}
