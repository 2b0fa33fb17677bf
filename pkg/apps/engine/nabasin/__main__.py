from nabasin.cli import main

raise SystemExit(main())
