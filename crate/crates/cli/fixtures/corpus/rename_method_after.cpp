class Math {
public:
  int doubled(int x){
    return x + x;
  }
};
