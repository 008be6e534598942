# Core Package - Evaluación certificada, momentos exactos y motor Monte Carlo
