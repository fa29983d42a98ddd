from etf_forge.cli import main

main()
