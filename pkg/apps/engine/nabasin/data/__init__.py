from nabasin.data.artifacts import read_pgm, write_csv, write_json, write_pgm, write_summary

__all__ = ["read_pgm", "write_csv", "write_json", "write_pgm", "write_summary"]
