# Utils Package - Validadores y utilidades de formato
